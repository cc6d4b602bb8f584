use proptest::prelude::*;
use refusal_index::estimator::tally;
use refusal_index::ingest::{join_passes, parse_records, units, write_records, GradeLabel, JoinOptions, QuestionRecord};

fn label() -> impl Strategy<Value = GradeLabel> {
    prop_oneof![Just(GradeLabel::Correct), Just(GradeLabel::Incorrect), Just(GradeLabel::Refused)]
}

/// A consistent two-pass record set: pass-2 rows exactly for pass-1 refusals.
fn record_set() -> impl Strategy<Value = Vec<QuestionRecord>> {
    prop::collection::vec((label(), prop_oneof![Just(GradeLabel::Correct), Just(GradeLabel::Incorrect)], 0usize..3), 1..60)
        .prop_map(|rows| {
            let mut out = Vec::new();
            for (i, (first, second, unit)) in rows.into_iter().enumerate() {
                let rec = |pass, label| QuestionRecord {
                    question_id: format!("q\"{i}\u{e9}"),
                    model_id: format!("m{}", unit % 2),
                    setting_id: format!("s{unit}"),
                    pass,
                    label,
                };
                out.push(rec(1, first));
                if first == GradeLabel::Refused {
                    out.push(rec(2, second));
                }
            }
            out
        })
}

fn serialize(records: &[QuestionRecord]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_records(&mut buf, records).unwrap();
    buf
}

proptest! {
    #[test]
    fn parse_serialize_parse_round_trips(records in record_set()) {
        let text = serialize(&records);
        let parsed = parse_records(text.as_slice()).unwrap();
        prop_assert_eq!(&parsed, &records);
        prop_assert_eq!(serialize(&parsed), text);
    }

    #[test]
    fn joined_tallies_partition_questions(records in record_set()) {
        for (m, s) in units(&records) {
            let joined = join_passes(&records, &m, &s, JoinOptions::default()).unwrap();
            let t = tally(&joined).unwrap();
            prop_assert_eq!(t.correct_first + t.incorrect_first + t.refused, t.n);
            prop_assert_eq!(t.refused_then_correct + t.refused_then_incorrect, t.refused);
            let summary = t.summary().unwrap();
            let incorrect1 = t.incorrect_first as f64 / t.n as f64;
            prop_assert!((summary.c1 + incorrect1 + summary.r - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn diagnostics_carry_line_numbers_and_codes() {
    let text = concat!(
        "{\"question_id\":\"q1\",\"model_id\":\"m\",\"setting_id\":\"s\",\"pass\":1,\"label\":\"correct\"}\n",
        "{\"question_id\":\"q1\",\"model_id\":\"m\",\"setting_id\":\"s\",\"pass\":1,\"label\":\"correct\"}\n",
        "{\"question_id\":\"q2\",\"model_id\":\"m\",\"setting_id\":\"s\",\"pass\":1}\n",
    );
    let errors = parse_records(text.as_bytes()).unwrap_err();
    let rendered = errors.to_string();
    assert!(rendered.contains("LINE 2: duplicate-key"), "{rendered}");
    assert!(rendered.contains("line 1"), "{rendered}");
    assert!(rendered.contains("LINE 3: missing-field"), "{rendered}");
}
