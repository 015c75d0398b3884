use nalgebra::{Matrix3, Vector3};

use crate::error::{check_probability, Error, Result};
use crate::measurement::{syndrome_of_category, AssignmentConvention};

/// Flip probability after input error `p_in` and applied error `p_e`.
pub fn total_error(p_in: f64, p_e: f64) -> f64 {
    p_in + p_e - 2.0 * p_in * p_e
}

/// `[P0, P1, P2, P3]`: no error, or the decoder naming qubit 1, 2 or 3.
pub fn syndrome_probabilities(p_in: [f64; 3], p_e: f64) -> Result<[f64; 4]> {
    check_probability("p_e", p_e)?;
    for p in p_in {
        check_probability("p_in", p)?;
    }
    Ok(pattern_probabilities(p_in.map(|p| total_error(p, p_e))))
}

fn pattern_probabilities(p: [f64; 3]) -> [f64; 4] {
    let q = p.map(|v| 1.0 - v);
    let single = |i: usize| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        p[i] * q[j] * q[k] + q[i] * p[j] * p[k]
    };
    [q[0] * q[1] * q[2] + p[0] * p[1] * p[2], single(0), single(1), single(2)]
}

/// Pushes ideal syndrome probabilities through the two independent readout
/// channels of `conv`. Each generator's outcome is misreported with
/// probability `1 - F` of the ancilla state it maps to.
pub fn detected_syndrome_probabilities(p: [f64; 4], conv: AssignmentConvention, f0: f64, f1: f64) -> Result<[f64; 4]> {
    check_probability("F0", f0)?;
    check_probability("F1", f1)?;
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-9 || p.iter().any(|v| *v < -1e-12) {
        return Err(Error::InvalidArgument(format!("syndrome probabilities sum to {sum}")));
    }
    let fid = |bit: bool| if bit { f1 } else { f0 };
    let mut out = [0.0; 4];
    for (c, &pc) in p.iter().enumerate() {
        let s = syndrome_of_category(c);
        let f = [fid(conv.ancilla_for(0, s.s1).bit()), fid(conv.ancilla_for(1, s.s2).bit())];
        for flip1 in [false, true] {
            for flip2 in [false, true] {
                let w = (if flip1 { 1.0 - f[0] } else { f[0] }) * (if flip2 { 1.0 - f[1] } else { f[1] });
                let o1 = if flip1 { s.s1.flipped() } else { s.s1 };
                let o2 = if flip2 { s.s2.flipped() } else { s.s2 };
                out[crate::code::Syndrome::new(o1, o2).category()] += pc * w;
            }
        }
    }
    Ok(out)
}

/// Inverts the `p_e = 0` syndrome probabilities for the three input errors,
/// each in `[0, 0.5]`, by damped Newton iteration seeded at `p_i = P_i`.
pub fn infer_input_errors(measured: [f64; 4]) -> Result<[f64; 3]> {
    let sum: f64 = measured.iter().sum();
    if measured.iter().any(|v| !(0.0..=1.0).contains(v)) || (sum - 1.0).abs() > 1e-2 {
        return Err(Error::InvalidArgument(format!("measured probabilities {measured:?} are not a distribution")));
    }
    let target = Vector3::new(measured[1], measured[2], measured[3]) / sum;
    let residual = |p: &Vector3<f64>| -> Vector3<f64> {
        let r = pattern_probabilities([p[0], p[1], p[2]]);
        Vector3::new(r[1], r[2], r[3]) - target
    };
    let mut p = target.map(|v| v.clamp(0.0, 0.5));
    let mut r = residual(&p);
    for _ in 0..100 {
        if r.norm() < 1e-14 {
            break;
        }
        let j = jacobian(&p);
        let step = j.lu().solve(&r).ok_or(Error::Singular)?;
        let mut t = 1.0;
        loop {
            let cand = (p - step * t).map(|v| v.clamp(0.0, 0.5));
            let rc = residual(&cand);
            if rc.norm() < r.norm() || t < 1e-6 {
                p = cand;
                r = rc;
                break;
            }
            t *= 0.5;
        }
    }
    if r.norm() > 1e-10 {
        return Err(Error::Infeasible(format!(
            "no input errors in [0, 0.5] reproduce {measured:?} (residual {:.2e})",
            r.norm()
        )));
    }
    Ok([p[0], p[1], p[2]])
}

fn jacobian(p: &Vector3<f64>) -> Matrix3<f64> {
    // d P_i / d p_k for P_i = p_i q_j q_k + q_i p_j p_k.
    let q = p.map(|v| 1.0 - v);
    Matrix3::from_fn(|row, col| {
        let (j, k) = ((row + 1) % 3, (row + 2) % 3);
        if col == row {
            q[j] * q[k] - p[j] * p[k]
        } else {
            let other = if col == j { k } else { j };
            -p[row] * q[other] + q[row] * p[other]
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_error_examples() {
        let p = syndrome_probabilities([0.064, 0.091, 0.077], 0.0).unwrap();
        assert!((p[0] - 0.7858).abs() < 1e-4);
        assert_eq!(syndrome_probabilities([0.0; 3], 0.5).unwrap(), [0.25; 4]);
        let inferred = infer_input_errors([0.785, 0.060, 0.083, 0.071]).unwrap();
        for (got, want) in inferred.iter().zip([0.064, 0.091, 0.077]) {
            assert!((got - want).abs() < 2e-3, "{inferred:?}");
        }
        assert_eq!(infer_input_errors([1.0, 0.0, 0.0, 0.0]).unwrap(), [0.0; 3]);
        assert!(infer_input_errors([0.2, 0.6, 0.1, 0.1]).is_err());
    }

    #[test]
    fn brute_force_enumeration() {
        for &p in &[0.0, 0.13, 0.3, 0.5, 0.77] {
            let mut want = [0.0; 4];
            for pattern in 0..8u32 {
                let flips = [pattern & 1 != 0, pattern & 2 != 0, pattern & 4 != 0];
                let w: f64 = flips.iter().map(|&f| if f { p } else { 1.0 - p }).product();
                let s1 = flips[0] ^ flips[1];
                let s2 = flips[1] ^ flips[2];
                let cat = match (s1, s2) {
                    (false, false) => 0,
                    (true, false) => 1,
                    (true, true) => 2,
                    (false, true) => 3,
                };
                want[cat] += w;
            }
            let got = syndrome_probabilities([0.0; 3], p).unwrap();
            for k in 0..4 {
                assert!((got[k] - want[k]).abs() < 1e-15);
            }
            assert!((got[0] - (1.0 - 3.0 * p + 3.0 * p * p)).abs() < 1e-15);
        }
    }

    #[test]
    fn symmetric_readout_structure() {
        let f = 0.93;
        for conv in AssignmentConvention::ALL {
            let d = detected_syndrome_probabilities([1.0, 0.0, 0.0, 0.0], conv, f, f).unwrap();
            let want = [f * f, f * (1.0 - f), (1.0 - f) * (1.0 - f), f * (1.0 - f)];
            for k in 0..4 {
                assert!((d[k] - want[k]).abs() < 1e-15);
            }
        }
        let p = [0.5, 0.2, 0.2, 0.1];
        assert_eq!(detected_syndrome_probabilities(p, AssignmentConvention::OPTIMAL, 1.0, 1.0).unwrap(), p);
        assert!(detected_syndrome_probabilities([0.5, 0.2, 0.2, 0.2], AssignmentConvention::OPTIMAL, 0.9, 0.9).is_err());
    }

    #[test]
    fn optimal_convention_closed_form() {
        // Written out for {1,1}: the no-error outcome reads as (1,1).
        let (f0, f1) = (0.890, 0.988);
        let p = syndrome_probabilities([0.064, 0.091, 0.077], 0.2).unwrap();
        let d = detected_syndrome_probabilities(p, AssignmentConvention::OPTIMAL, f0, f1).unwrap();
        let want = [
            p[0] * f1 * f1 + (p[1] + p[3]) * f1 * (1.0 - f0) + p[2] * (1.0 - f0).powi(2),
            p[1] * f1 * f0 + p[0] * f1 * (1.0 - f1) + p[2] * f0 * (1.0 - f0) + p[3] * (1.0 - f1) * (1.0 - f0),
            p[2] * f0 * f0 + (p[1] + p[3]) * f0 * (1.0 - f1) + p[0] * (1.0 - f1).powi(2),
            p[3] * f1 * f0 + p[0] * f1 * (1.0 - f1) + p[2] * f0 * (1.0 - f0) + p[1] * (1.0 - f1) * (1.0 - f0),
        ];
        for k in 0..4 {
            assert!((d[k] - want[k]).abs() < 1e-15, "category {k}");
        }
    }
}
