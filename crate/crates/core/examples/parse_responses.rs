//! Normalize a handful of typical free-text model answers.
//!
//!     cargo run --example parse_responses

use borrowbench::parse::{parse, parse_rate, NormalizationTable};
use borrowbench::Task;

const REPLIES: &[(Task, &str)] = &[
    (Task::Classify, "FR_LOAN\nThe -éieren ending comes from French -er."),
    (Task::Classify, "**Label:** de_loan"),
    (Task::Classify, "<think>Could be German... it is French.</think>\nFrench loan"),
    (Task::Classify, "The word looks native to me.\nNATIVE"),
    (Task::Classify, "English. It is a tech term."),
    (Task::Classify, "I cannot tell."),
    (Task::Neology, "Yes."),
    (Task::Neology, "no - it is well established"),
    (Task::Neology, ""),
];

fn main() -> borrowbench::Result<()> {
    let table = NormalizationTable::default();
    let answers: Vec<_> = REPLIES
        .iter()
        .map(|(task, raw)| {
            let answer = parse(raw, *task, &table);
            println!("{task:<8} {:<14} <- {raw:?}", answer.as_str());
            answer
        })
        .collect();
    println!("\nparse error rate: {:.3}", parse_rate(&answers)?);
    Ok(())
}
