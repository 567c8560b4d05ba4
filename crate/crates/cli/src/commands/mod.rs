mod rank;
mod score;
mod simulate;
mod verify;

pub use rank::{run_rank, RankArgs};
pub use score::{run_score, ScoreArgs};
pub use simulate::{run_simulate, SimulateArgs};
pub use verify::{run_verify, VerifyArgs};
