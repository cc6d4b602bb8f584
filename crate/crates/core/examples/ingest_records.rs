// Parsing graded records, joining the two passes and reporting problems.
//
// ```bash
// cargo run --example ingest_records
// ```

use refusal_index::ingest::{join_passes, parse_records, units, JoinOptions};

const GOOD: &str = r#"{"question_id":"q1","model_id":"m1","setting_id":"default","pass":1,"label":"correct"}
{"question_id":"q2","model_id":"m1","setting_id":"default","pass":1,"label":"NOT_ATTEMPTED"}
{"question_id":"q2","model_id":"m1","setting_id":"default","pass":2,"label":"incorrect"}
{"question_id":"q3","model_id":"m1","setting_id":"default","pass":1,"label":"incorrect"}
"#;

const BAD: &str = r#"{"question_id":"q1","model_id":"m1","setting_id":"s","pass":1,"label":"maybe"}
not json
{"question_id":"q2","model_id":"m1","setting_id":"s","pass":3,"label":"correct"}
"#;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let records = parse_records(GOOD.as_bytes())?;
    for (model, setting) in units(&records) {
        let joined = join_passes(&records, &model, &setting, JoinOptions::default())?;
        for o in &joined {
            println!("{model}/{setting} {} pass1={} pass2={:?} wrong={}", o.question_id, o.pass1, o.pass2, o.w_hat);
        }
    }

    // every problem is collected, each with a stable code
    let errors = parse_records(BAD.as_bytes()).unwrap_err();
    println!("{errors}");
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
