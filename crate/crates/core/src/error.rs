// Copyright 2026 The blindprep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

use thiserror::Error;

use crate::statevector::Label;

/// Failure categories shared by every module.
///
/// The FFI crate maps each variant onto a stable integer code through
/// [`Error::code`], so new variants go at the end of a category.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("unknown qubit label {0}")]
    UnknownLabel(Label),
    #[error("qubit count {0} exceeds the simulator cap of {1}")]
    TooManyQubits(usize, usize),
    #[error("forced branch {bit} on qubit {label} has probability {probability:e}")]
    DegenerateBranch {
        label: Label,
        bit: u8,
        probability: f64,
    },
    #[error("forced branch word exhausted after {0} outcomes")]
    BranchWordExhausted(usize),
    #[error("pattern structure: {0}")]
    Structural(String),
    #[error("measurement sequencing: {0}")]
    Sequencing(String),
    #[error("blindness contract violated: {0}")]
    Contract(String),
    #[error("estimation failed: {0}")]
    Estimation(String),
    #[error("config: {0}")]
    Config(String),
}

impl Error {
    /// Stable numeric code, also used as the C ABI status value.
    pub fn code(&self) -> i32 {
        match self {
            Error::Input(_) => 1,
            Error::UnknownLabel(_) => 2,
            Error::TooManyQubits(..) => 3,
            Error::DegenerateBranch { .. } => 4,
            Error::BranchWordExhausted(_) => 5,
            Error::Structural(_) => 6,
            Error::Sequencing(_) => 7,
            Error::Contract(_) => 8,
            Error::Estimation(_) => 9,
            Error::Config(_) => 10,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
