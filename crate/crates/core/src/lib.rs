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

//! Blind preparation of [[7,1,3]] Steane-encoded qubits on cluster states.
//!
//! The crate is organised bottom-up:
//!
//! * [`statevector`]: dense labelled pure-state simulator.
//! * [`mbqc`]: cluster graphs, measurement patterns, Pauli-frame tracking and
//!   just-in-time pattern execution.
//! * [`steane`]: the code itself, circuit encoder, syndrome extraction and the
//!   encoder compiled to measurement patterns.
//! * [`blindness`]: outcome-distribution and reduced-state checks that the
//!   server's view does not depend on the hidden angle.
//! * [`resources`]: channel transmittance, decoy-state single-photon bound,
//!   pulse counts and preparation efficiency.
//! * [`cli`]: the `blindprep` command-line front end.

pub mod blindness;
pub mod cli;
pub mod error;
pub mod mbqc;
pub mod resources;
pub mod statevector;
pub mod steane;

pub use error::{Error, Result};
pub use statevector::{DensityMatrix, Gate, Label, MeasBasis, OutcomeSource, PureState};
