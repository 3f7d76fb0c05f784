//! One-dimensional maximization of unimodal functions.
//!
//! Golden-section search narrows the bracket while function-value
//! comparisons are still meaningful. Near the optimum the values of a smooth
//! objective differ by less than their rounding error, so the last digits
//! come from successive parabolic interpolation through well separated
//! points instead.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Bracket width (relative to the starting interval) at which the golden
/// phase hands over to parabolic polishing.
const POLISH_FRACTION: f64 = 1e-4;
const POLISH_FLOOR: f64 = 1e-5;
const MAX_POLISH_STEPS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Maximizes a unimodal `f` on `[lo, hi]`, returning an abscissa accurate to
/// roughly `tol` for smooth objectives.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Maximum {
    assert!(lo <= hi, "empty interval [{lo}, {hi}]");
    let mut evals = 0usize;
    let mut eval = |x: f64| {
        evals += 1;
        f(x)
    };
    let width0 = hi - lo;
    if width0 == 0.0 {
        let value = eval(lo);
        return Maximum { x: lo, value, evaluations: evals };
    }
    let handover = (POLISH_FRACTION * width0).max(tol);

    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    while b - a > handover {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = eval(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = eval(x2);
        }
    }
    let (mut x, mut fx) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    // Endpoints are candidates too: the maximum may sit on the boundary.
    for end in [lo, hi] {
        if (end - x).abs() <= 2.0 * handover {
            let fe = eval(end);
            if fe > fx {
                x = end;
                fx = fe;
            }
        }
    }

    let floor = POLISH_FLOOR * width0.min(1.0).max(x.abs().min(width0));
    let mut h = (b - a).max(floor);
    for _ in 0..MAX_POLISH_STEPS {
        let (p0, p1, p2) = if x - h < lo {
            (lo, lo + h, lo + 2.0 * h)
        } else if x + h > hi {
            (hi - 2.0 * h, hi - h, hi)
        } else {
            (x - h, x, x + h)
        };
        let (g0, g1, g2) = (eval(p0), eval(p1), eval(p2));
        let num = (p1 - p0).powi(2) * (g1 - g2) - (p1 - p2).powi(2) * (g1 - g0);
        let den = (p1 - p0) * (g1 - g2) - (p1 - p2) * (g1 - g0);
        // den < 0 means the fitted parabola opens upward (or is flat).
        if !(den > 0.0) {
            break;
        }
        let v = (p1 - 0.5 * num / den).clamp(lo, hi);
        let fv = eval(v);
        // Tolerate rounding-level decreases: the polish is more precise
        // than the comparison itself near the optimum.
        let slack = 1e-13 * fx.abs().max(1.0);
        if !(fv >= fx - slack) {
            break;
        }
        let step = (v - x).abs();
        x = v;
        fx = fv;
        if step <= tol {
            break;
        }
        h = (h / 8.0).max(floor).max(step);
    }
    Maximum { x, value: fx, evaluations: evals }
}
