//! Drives the chat service in-process: one session with the rule system, a survey
//! and the aggregate report.

use std::collections::BTreeMap;
use std::sync::Arc;

use usersim::lab::Lab;
use usersim::service::{systems_from, Service, ServiceConfig, Store, SurveyForm, SurveyResult};

fn main() -> usersim::Result<()> {
    let lab = Lab::synthetic()?;
    let dir = std::env::temp_dir().join(format!("usersim-chat-{}", std::process::id()));
    let service = Arc::new(Service::new(
        lab.core.clone(),
        lab.corpus.goals.clone(),
        systems_from(&BTreeMap::new()),
        Store::open(&dir)?,
        ServiceConfig::default(),
    )?);

    let created = service.create_session("rule")?;
    println!("{}\n", created.goal_text);
    for text in [
        "i am looking for a moderately priced restaurant in the south",
        "any food is fine",
        "what is the address ?",
        "thanks , goodbye",
    ] {
        let reply = service.post_message(&created.session_id, text)?;
        println!("user: {text}\nsys:  {}{}", reply.reply, if reply.done { "  [done]" } else { "" });
        if reply.done {
            break;
        }
    }
    let survey = SurveyResult::try_from(SurveyForm {
        solved: 0.5,
        satisfaction: 4,
        efficiency: 4,
        naturalness: 3,
        rule_likeness: 5,
    })?;
    service.post_survey(&created.session_id, survey)?;
    println!("\n{}", serde_json::to_string_pretty(&service.report())?);
    println!("transcripts under {}", dir.display());
    Ok(())
}
