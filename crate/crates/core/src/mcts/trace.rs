use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Select,
    Expand,
    Simulate,
    Backprop,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Select => "select",
            Phase::Expand => "expand",
            Phase::Simulate => "simulate",
            Phase::Backprop => "backprop",
        })
    }
}

/// One line of the debug trace. For `select` rows `uct` is the score the
/// node was chosen with (absent for the root); for `simulate` rows `value`
/// is the scaled reward being backed up.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub iteration: u64,
    pub phase: Phase,
    pub node_smiles: String,
    pub value: f64,
    pub visits: u64,
    pub uct: Option<f64>,
}

impl fmt::Display for TraceEvent {
    /// `iteration,phase,node_smiles,V,n,uct`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{},",
            self.iteration, self.phase, self.node_smiles, self.value, self.visits
        )?;
        if let Some(u) = self.uct {
            write!(f, "{u}")?;
        }
        Ok(())
    }
}
