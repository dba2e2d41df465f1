//! Canned external services.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::prov::QualifiedName;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ServiceError {
    #[error("service {0} is unavailable")]
    Unavailable(QualifiedName),
    #[error("no service {0} is registered")]
    UnknownService(QualifiedName),
    #[error("service {0} is already registered")]
    DuplicateService(QualifiedName),
}

pub type Params = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reply {
    pub status: i64,
    pub body: String,
}

impl Reply {
    pub fn new(status: i64, body: impl Into<String>) -> Self {
        Self {
            status,
            body: body.into(),
        }
    }

    pub fn is_ok(&self) -> bool {
        (200..300).contains(&self.status)
    }
}

fn normalize_params(params: &Params) -> Params {
    params
        .iter()
        .map(|(k, v)| (k.trim().to_lowercase(), v.trim().to_string()))
        .collect()
}

/// Replies are looked up by exact `(endpoint, params)`, then by endpoint,
/// and fall back to 404.
#[derive(Debug, Clone)]
pub struct ServiceStub {
    id: QualifiedName,
    display_name: String,
    exact: BTreeMap<(String, Params), Reply>,
    defaults: BTreeMap<String, Reply>,
    available: bool,
}

impl ServiceStub {
    pub fn new(id: QualifiedName, display_name: &str) -> Self {
        Self {
            id,
            display_name: display_name.to_string(),
            exact: BTreeMap::new(),
            defaults: BTreeMap::new(),
            available: true,
        }
    }

    pub fn with_reply(mut self, endpoint: &str, params: &Params, reply: Reply) -> Self {
        self.exact
            .insert((endpoint.to_string(), normalize_params(params)), reply);
        self
    }

    pub fn with_default(mut self, endpoint: &str, reply: Reply) -> Self {
        self.defaults.insert(endpoint.to_string(), reply);
        self
    }

    pub fn id(&self) -> &QualifiedName {
        &self.id
    }

    pub fn display_name(&self) -> &str {
        &self.display_name
    }

    pub fn set_available(&mut self, available: bool) {
        self.available = available;
    }

    pub fn lookup(&self, endpoint: &str, params: &Params) -> Reply {
        self.exact
            .get(&(endpoint.to_string(), normalize_params(params)))
            .or_else(|| self.defaults.get(endpoint))
            .cloned()
            .unwrap_or_else(|| Reply::new(404, "not found"))
    }
}

/// One request that reached a stub.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceCall {
    pub trace_id: String,
    pub service: QualifiedName,
    pub endpoint: String,
    pub status: i64,
}

#[derive(Debug, Clone, Default)]
pub struct ServiceRegistry {
    stubs: BTreeMap<QualifiedName, ServiceStub>,
    calls: Vec<ServiceCall>,
}

impl ServiceRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, stub: ServiceStub) -> Result<(), ServiceError> {
        if self.stubs.contains_key(stub.id()) {
            return Err(ServiceError::DuplicateService(stub.id().clone()));
        }
        self.stubs.insert(stub.id().clone(), stub);
        Ok(())
    }

    pub fn get(&self, id: &QualifiedName) -> Option<&ServiceStub> {
        self.stubs.get(id)
    }

    pub fn get_mut(&mut self, id: &QualifiedName) -> Option<&mut ServiceStub> {
        self.stubs.get_mut(id)
    }

    pub fn stubs(&self) -> impl Iterator<Item = &ServiceStub> {
        self.stubs.values()
    }

    /// Sends a request. A down stub still counts the call and answers 503.
    pub fn call(
        &mut self,
        trace_id: &str,
        service: &QualifiedName,
        endpoint: &str,
        params: &Params,
    ) -> Result<Reply, ServiceError> {
        let stub = self
            .stubs
            .get(service)
            .ok_or_else(|| ServiceError::UnknownService(service.clone()))?;
        let reply = if stub.available {
            stub.lookup(endpoint, params)
        } else {
            Reply::new(503, "service unavailable")
        };
        self.calls.push(ServiceCall {
            trace_id: trace_id.to_string(),
            service: service.clone(),
            endpoint: endpoint.to_string(),
            status: reply.status,
        });
        Ok(reply)
    }

    pub fn calls(&self) -> &[ServiceCall] {
        &self.calls
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids;

    fn params(pairs: &[(&str, &str)]) -> Params {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn lookup_order() {
        let stub = ServiceStub::new(ids::service("w"), "W")
            .with_reply("/f", &params(&[("lat", "1")]), Reply::new(200, "exact"))
            .with_default("/f", Reply::new(200, "default"));
        assert_eq!(stub.lookup("/f", &params(&[(" LAT ", " 1")])).body, "exact");
        assert_eq!(stub.lookup("/f", &params(&[("lat", "2")])).body, "default");
        assert_eq!(stub.lookup("/g", &Params::new()).status, 404);
    }

    #[test]
    fn calls_are_counted() {
        let mut reg = ServiceRegistry::new();
        reg.register(ServiceStub::new(ids::service("w"), "W")).unwrap();
        assert!(reg.register(ServiceStub::new(ids::service("w"), "W")).is_err());
        reg.call("t1", &ids::service("w"), "/x", &Params::new()).unwrap();
        reg.get_mut(&ids::service("w")).unwrap().set_available(false);
        let reply = reg.call("t2", &ids::service("w"), "/x", &Params::new()).unwrap();
        assert_eq!(reply.status, 503);
        assert!(reg.call("t3", &ids::service("nope"), "/x", &Params::new()).is_err());
        assert_eq!(reg.calls().len(), 2);
    }
}
