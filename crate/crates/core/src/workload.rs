//! Quadrotor thrust/torque mixer and a PD attitude-control trace generator.

use nalgebra::{Matrix4, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadParams {
    /// Lift constant.
    pub b: f64,
    /// Rotor-to-center distance.
    pub d: f64,
    /// Secondary lift (drag) constant.
    pub k: f64,
}

impl Default for QuadParams {
    fn default() -> Self {
        QuadParams {
            b: 1.0,
            d: 1.0,
            k: 1.0,
        }
    }
}

impl QuadParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("b", self.b), ("d", self.d), ("k", self.k)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::QuadParams(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Maps squared rotor speeds to (T, Γ1, Γ2, Γ3).
    pub fn matrix(&self) -> Matrix4<f64> {
        let (b, d, k) = (self.b, self.d, self.k);
        let db = d * b;
        Matrix4::new(
            -b, -b, -b, -b, //
            0.0, -db, 0.0, db, //
            -db, 0.0, db, 0.0, //
            k, -k, k, -k,
        )
    }
}

/// Thrust and torques.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Wrench {
    pub thrust: f64,
    pub torque: [f64; 3],
}

impl Wrench {
    pub fn as_vector(&self) -> Vector4<f64> {
        Vector4::new(self.thrust, self.torque[0], self.torque[1], self.torque[2])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotorCommand {
    /// Squared angular velocities ω₁²..ω₄².
    pub omega_sq: [f64; 4],
    /// Set when a component is negative, i.e. not physically reachable.
    pub infeasible: bool,
}

pub fn mixer(omega_sq: [f64; 4], params: &QuadParams) -> Wrench {
    let v = params.matrix() * Vector4::from(omega_sq);
    Wrench {
        thrust: v[0],
        torque: [v[1], v[2], v[3]],
    }
}

pub fn inverse_mixer(wrench: &Wrench, params: &QuadParams) -> Result<RotorCommand> {
    params.validate()?;
    let x = params
        .matrix()
        .lu()
        .solve(&wrench.as_vector())
        .ok_or(Error::SingularMixer)?;
    let omega_sq = [x[0], x[1], x[2], x[3]];
    Ok(RotorCommand {
        omega_sq,
        infeasible: omega_sq.iter().any(|&w| w < 0.0),
    })
}

const AXES: [&str; 4] = ["r", "p", "y", "z"];
const KP: [f64; 4] = [4.5, 4.5, 2.0, 6.0];
const KD: [f64; 4] = [0.8, 0.8, 0.3, 1.2];
const DT: f64 = 0.01;

/// Instructions emitted per control step.
pub const STEP_TEMPLATE_LEN: usize = 4 * 9 + 18;

/// Emits `steps` unrolled iterations of a PD attitude/altitude loop followed
/// by the inverse mixer (b = d = k = 1). Each axis reads its measurement and
/// the previous error, forms P and D terms, and stores the new error for the
/// next step. The seed only chooses the per-step setpoints.
///
/// Illustrative template; its contract is that the output parses and has a
/// realistic dependency shape.
pub fn gen_pd_trace(steps: usize, seed: u64) -> Result<String> {
    if steps == 0 {
        return Err(Error::ZeroSteps);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    out.push_str(&format!(
        "; PD attitude control, {steps} step(s), seed {seed}\n"
    ));
    for s in 1..=steps {
        out.push_str(&format!("; step {s}\n"));
        for (i, a) in AXES.iter().enumerate() {
            let set: f64 = if *a == "z" {
                rng.gen_range(0.5..2.0)
            } else {
                rng.gen_range(-0.2..0.2)
            };
            let line = |text: String, out: &mut String| {
                out.push_str(&text);
                out.push('\n');
            };
            line(
                format!("%m{a}{s} = load double, double* %st{a}, align 8"),
                &mut out,
            );
            line(
                format!("%e{a}{s} = fsub double {set:.6}, %m{a}{s}"),
                &mut out,
            );
            line(
                format!("%q{a}{s} = load double, double* %pe{a}, align 8"),
                &mut out,
            );
            line(
                format!("%d{a}{s} = fsub double %e{a}{s}, %q{a}{s}"),
                &mut out,
            );
            line(
                format!("%v{a}{s} = fdiv double %d{a}{s}, {DT:.6}"),
                &mut out,
            );
            line(
                format!("%kp{a}{s} = fmul double {:.6}, %e{a}{s}", KP[i]),
                &mut out,
            );
            line(
                format!("%kd{a}{s} = fmul double {:.6}, %v{a}{s}", KD[i]),
                &mut out,
            );
            line(
                format!("%u{a}{s} = fadd double %kp{a}{s}, %kd{a}{s}"),
                &mut out,
            );
            line(
                format!("store double %e{a}{s}, double* %pe{a}, align 8"),
                &mut out,
            );
        }
        // Inverse mixer with b = d = k = 1:
        // w1 = -T/4 - G2/2 + G3/4, w2 = -T/4 - G1/2 - G3/4,
        // w3 = -T/4 + G2/2 + G3/4, w4 = -T/4 + G1/2 - G3/4.
        let body = [
            format!("%t{s} = fmul double -0.250000, %uz{s}"),
            format!("%g1{s} = fmul double 0.500000, %ur{s}"),
            format!("%g2{s} = fmul double 0.500000, %up{s}"),
            format!("%g3{s} = fmul double 0.250000, %uy{s}"),
            format!("%wa1{s} = fsub double %t{s}, %g2{s}"),
            format!("%w1{s} = fadd double %wa1{s}, %g3{s}"),
            format!("%wa2{s} = fsub double %t{s}, %g1{s}"),
            format!("%w2{s} = fsub double %wa2{s}, %g3{s}"),
            format!("%wa3{s} = fadd double %t{s}, %g2{s}"),
            format!("%w3{s} = fadd double %wa3{s}, %g3{s}"),
            format!("%wa4{s} = fadd double %t{s}, %g1{s}"),
            format!("%w4{s} = fsub double %wa4{s}, %g3{s}"),
            format!("%sat{s} = fcmp olt double %w1{s}, 0.000000"),
            format!("store double %w1{s}, double* %rot1, align 8"),
            format!("store double %w2{s}, double* %rot2, align 8"),
            format!("store double %w3{s}, double* %rot3, align 8"),
            format!("store double %w4{s}, double* %rot4, align 8"),
            format!("br i1 %sat{s}, label %clamp{s}, label %next{s}"),
        ];
        for l in body {
            out.push_str(&l);
            out.push('\n');
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ddg::build_ddg;
    use crate::trace::{build_tables, parse_trace, EnergyTable};

    fn unit() -> QuadParams {
        QuadParams::default()
    }

    #[test]
    fn hover() {
        let w = mixer([1.0; 4], &unit());
        assert_eq!((w.thrust, w.torque), (-4.0, [0.0, 0.0, 0.0]));
        let w = mixer([1.0, 0.0, 0.0, 0.0], &unit());
        assert_eq!((w.thrust, w.torque), (-1.0, [0.0, -1.0, 1.0]));
        let w = mixer([0.0; 4], &unit());
        assert_eq!((w.thrust, w.torque), (0.0, [0.0; 3]));
    }

    #[test]
    fn inverse() {
        let cmd = inverse_mixer(
            &Wrench {
                thrust: -4.0,
                torque: [0.0; 3],
            },
            &unit(),
        )
        .unwrap();
        for w in cmd.omega_sq {
            assert!((w - 1.0).abs() < 1e-12);
        }
        assert!(!cmd.infeasible);
        let cmd = inverse_mixer(
            &Wrench {
                thrust: 0.0,
                torque: [0.0, 0.0, 1.0],
            },
            &unit(),
        )
        .unwrap();
        let want = [0.25, -0.25, 0.25, -0.25];
        for (w, e) in cmd.omega_sq.iter().zip(want) {
            assert!((w - e).abs() < 1e-12);
        }
        assert!(cmd.infeasible);
    }

    #[test]
    fn bad_params() {
        let p = QuadParams { b: 0.0, ..unit() };
        assert!(matches!(
            inverse_mixer(
                &Wrench {
                    thrust: 1.0,
                    torque: [0.0; 3]
                },
                &p
            ),
            Err(Error::QuadParams(_))
        ));
    }

    #[test]
    fn trace_parses_with_template_length() {
        let text = gen_pd_trace(1, 7).unwrap();
        let prog = parse_trace(&text).unwrap();
        assert_eq!(prog.instructions.len(), STEP_TEMPLATE_LEN);
        assert_eq!(gen_pd_trace(3, 7).unwrap(), gen_pd_trace(3, 7).unwrap());
        assert_ne!(gen_pd_trace(3, 7).unwrap(), gen_pd_trace(3, 8).unwrap());
        assert!(matches!(gen_pd_trace(0, 7), Err(Error::ZeroSteps)));
    }

    #[test]
    fn two_steps_double_dependencies_plus_carried() {
        let count = |steps| {
            let prog = parse_trace(&gen_pd_trace(steps, 1).unwrap()).unwrap();
            build_tables(&prog)
                .dep_table
                .values()
                .map(Vec::len)
                .sum::<usize>()
        };
        // Step two's previous-error loads read step one's stores.
        assert_eq!(count(2), 2 * count(1) + 4);
    }

    #[test]
    fn ddg_is_acyclic() {
        let prog = parse_trace(&gen_pd_trace(4, 3).unwrap()).unwrap();
        let g = build_ddg(&prog, &build_tables(&prog), &EnergyTable::default());
        g.validate().unwrap();
    }
}
