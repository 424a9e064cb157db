//! Writes the bundled example plans to `data/`.

use quadfold::pattern::fixtures::{general_ff_plan, line_ff_plan, GeneralFfParams, LineFfParams};
use quadfold::pattern::PlanSpec;
use quadfold::BranchId;

fn main() -> quadfold::Result<()> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    std::fs::create_dir_all(&dir)?;
    let plans = [
        ("line_ff_plan.json", line_ff_plan(LineFfParams::default())?),
        (
            "general_ff_plan.json",
            general_ff_plan(GeneralFfParams::default(), [BranchId::Branch1; 2])?,
        ),
    ];
    for (name, plan) in plans {
        let text = serde_json::to_string_pretty(&PlanSpec::from_plan(&plan))?;
        std::fs::write(dir.join(name), text + "\n")?;
    }
    Ok(())
}
