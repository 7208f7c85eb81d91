use crate::error::{Error, Result};

fn check(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Argument(format!(
            "comparing vectors over {} and {} measures",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// `a` is no worse everywhere and strictly better somewhere (all minimized).
pub fn dominates(a: &[f64], b: &[f64]) -> Result<bool> {
    check(a, b)?;
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return Ok(false);
        }
        strict |= x < y;
    }
    Ok(strict)
}

/// `a` is within a factor `1 + eps` of `b` everywhere and no worse somewhere.
pub fn eps_dominates(a: &[f64], b: &[f64], eps: f64) -> Result<bool> {
    check(a, b)?;
    let mut somewhere = false;
    for (x, y) in a.iter().zip(b) {
        if *x > (1.0 + eps) * y {
            return Ok(false);
        }
        somewhere |= x <= y;
    }
    Ok(somewhere)
}
