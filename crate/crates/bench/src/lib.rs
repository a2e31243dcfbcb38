//! Shared fixtures for the kernel benchmarks.

use morinode::{FourierAnsatz, Nonlinearity};

pub fn quartic() -> Nonlinearity {
    Nonlinearity::polynomial(&[0.0, -0.3, -4.0, 0.0, 1.0])
}

pub fn cubic() -> Nonlinearity {
    Nonlinearity::polynomial(&[0.0, -1.0, 0.0, 1.0])
}

pub fn butterfly() -> FourierAnsatz {
    FourierAnsatz::new(
        -0.01173378,
        vec![-0.8836063, 0.2428734, 0.4465347, -0.01881213],
        vec![0.0, -0.6855379, 0.1853376, 0.2105862],
    )
    .expect("valid coefficients")
}
