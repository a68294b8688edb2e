//! Systems under test: the model abstraction, a surrogate
//! automatic-transmission plant, an echo test double, and a line-protocol
//! bridge to external simulator processes.

mod external;
mod model;
mod signal;
mod surrogate;

pub use external::{ExternalModel, DEFAULT_REPLY_TIMEOUT};
pub use model::{clamp_input, run_signal, EchoModel, InputChannel, ModelError, SystemModel};
pub use signal::{InputSignal, InputSignalError};
pub use surrogate::{
    SurrogateAt, DEFAULT_SUBSTEP, DOWNSHIFT_OMEGA, GEAR_RATIOS, IDLE_OMEGA, SHIFT_DWELL,
    UPSHIFT_OMEGA,
};
