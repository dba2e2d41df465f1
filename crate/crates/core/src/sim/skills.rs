//! Built-in demo skills and services.

use super::intent::{Intent, IntentRule};
use super::service::{Params, Reply, ServiceRegistry, ServiceStub};
use super::skill::{Skill, SkillContext, SkillError, SkillOutcome, SkillRegistry};
use crate::ids;
use crate::prov::QualifiedName;

pub const WEATHER_SKILL: &str = "weather-skill";
pub const GARAGE_SKILL: &str = "garage-door-skill";
pub const JOKE_SKILL: &str = "joke-skill";
pub const OPENWEATHER: &str = "openweather";

pub const DOOR_OPENED: &str = "door_opened";
pub const DOOR_CLOSED: &str = "door_closed";

pub struct WeatherSkill;

impl Skill for WeatherSkill {
    fn id(&self) -> QualifiedName {
        ids::skill(WEATHER_SKILL)
    }

    fn display_name(&self) -> &str {
        "Weather"
    }

    fn intents(&self) -> Vec<IntentRule> {
        vec![IntentRule::new(
            self.id(),
            "get_forecast",
            &["weather"],
            &["what", "is", "the", "today", "tomorrow", "forecast"],
        )
        .expect("static rule")]
    }

    fn handle(&self, _intent: &Intent, ctx: &mut SkillContext<'_>) -> Result<SkillOutcome, SkillError> {
        let Some(location) = ctx.datapoint("geo-location").map(str::to_string) else {
            return Ok(SkillOutcome::say("I need your location to check the weather."));
        };
        let (lat, lon) = location.split_once(',').unwrap_or((location.as_str(), ""));
        let params: Params = [("lat", lat), ("lon", lon)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v.trim().to_string()))
            .collect();
        let reply = ctx.call_service(&ids::service(OPENWEATHER), "/forecast", &params, "geo-location")?;
        let speech = if reply.is_ok() {
            format!("Here is the forecast: {}.", reply.body)
        } else {
            format!("Sorry, the weather service is not answering (status {}).", reply.status)
        };
        Ok(SkillOutcome::say(speech))
    }
}

pub struct GarageDoorSkill;

impl Skill for GarageDoorSkill {
    fn id(&self) -> QualifiedName {
        ids::skill(GARAGE_SKILL)
    }

    fn display_name(&self) -> &str {
        "Garage Door"
    }

    fn intents(&self) -> Vec<IntentRule> {
        let filler = ["the", "door", "please"];
        vec![
            IntentRule::new(self.id(), "open_door", &["garage", "open"], &filler).expect("static rule"),
            IntentRule::new(self.id(), "close_door", &["garage", "close"], &filler).expect("static rule"),
        ]
    }

    fn handle(&self, intent: &Intent, _ctx: &mut SkillContext<'_>) -> Result<SkillOutcome, SkillError> {
        match intent.name.as_str() {
            "open_door" => Ok(SkillOutcome::say("Opening the garage door.").with_action(DOOR_OPENED)),
            "close_door" => Ok(SkillOutcome::say("Closing the garage door.").with_action(DOOR_CLOSED)),
            other => Err(SkillError::Failed(format!("unexpected intent {other}"))),
        }
    }
}

pub struct JokeSkill;

const JOKES: [&str; 3] = [
    "I would tell you a UDP joke, but you might not get it.",
    "There are 10 kinds of people: those who read binary and those who don't.",
    "A SQL query walks into a bar, sees two tables and asks to join them.",
];

impl Skill for JokeSkill {
    fn id(&self) -> QualifiedName {
        ids::skill(JOKE_SKILL)
    }

    fn display_name(&self) -> &str {
        "Joke"
    }

    fn intents(&self) -> Vec<IntentRule> {
        vec![IntentRule::new(self.id(), "tell_joke", &["joke"], &["tell", "me", "a"]).expect("static rule")]
    }

    fn handle(&self, _intent: &Intent, ctx: &mut SkillContext<'_>) -> Result<SkillOutcome, SkillError> {
        let pick = (ctx.time().unix() / 60).rem_euclid(JOKES.len() as i64) as usize;
        Ok(SkillOutcome::say(JOKES[pick]))
    }
}

/// Builds a built-in skill by bare or qualified id.
pub fn builtin_skill(name: &str) -> Option<Box<dyn Skill>> {
    let id = ids::parse_skill_id(name)?;
    if id.prefix() != ids::SKILL.0 {
        return None;
    }
    match id.local() {
        WEATHER_SKILL => Some(Box::new(WeatherSkill)),
        GARAGE_SKILL => Some(Box::new(GarageDoorSkill)),
        JOKE_SKILL => Some(Box::new(JokeSkill)),
        _ => None,
    }
}

pub const BUILTIN_SKILLS: [&str; 3] = [WEATHER_SKILL, GARAGE_SKILL, JOKE_SKILL];

/// Registry with every built-in skill, or only the named ones when given.
pub fn skill_registry(names: &[String]) -> Result<SkillRegistry, SkillError> {
    let mut registry = SkillRegistry::new();
    if names.is_empty() {
        for name in BUILTIN_SKILLS {
            registry.register(builtin_skill(name).expect("builtin"))?;
        }
        return Ok(registry);
    }
    for name in names {
        let skill = builtin_skill(name).ok_or_else(|| SkillError::UnknownSkill(name.clone()))?;
        registry.register(skill)?;
    }
    Ok(registry)
}

pub fn demo_services() -> ServiceRegistry {
    let mut services = ServiceRegistry::new();
    services
        .register(
            ServiceStub::new(ids::service(OPENWEATHER), "OpenWeather")
                .with_default("/forecast", Reply::new(200, "light rain, 14 degrees")),
        )
        .expect("fresh registry");
    services
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factory() {
        assert!(builtin_skill("weather-skill").is_some());
        assert!(builtin_skill("mycroft:joke-skill").is_some());
        assert!(builtin_skill("svc:joke-skill").is_none());
        assert!(builtin_skill("dance-skill").is_none());
        assert_eq!(skill_registry(&[]).unwrap().len(), 3);
        let only = skill_registry(&["joke-skill".to_string()]).unwrap();
        assert_eq!(only.ids(), vec![ids::skill(JOKE_SKILL)]);
        assert!(matches!(
            skill_registry(&["x".into()]),
            Err(SkillError::UnknownSkill(_))
        ));
    }
}
