//! Explicit Runge-Kutta steppers for autonomous systems `y' = f(y)`.

/// Classical fixed-step RK4 with reusable stage buffers.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        Self {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }

    pub fn step<F>(&mut self, rhs: &F, y: &mut [f64], h: f64)
    where
        F: Fn(&[f64], &mut [f64]),
    {
        let n = y.len();
        rhs(y, &mut self.k1);
        for i in 0..n {
            self.tmp[i] = y[i] + 0.5 * h * self.k1[i];
        }
        rhs(&self.tmp, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = y[i] + 0.5 * h * self.k2[i];
        }
        rhs(&self.tmp, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = y[i] + h * self.k3[i];
        }
        rhs(&self.tmp, &mut self.k4);
        for i in 0..n {
            y[i] += h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

/// Outcome of one adaptive step attempt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveStep {
    pub accepted: bool,
    pub taken: f64,
    pub next: f64,
}

/// Runge-Kutta-Fehlberg 4(5) with local extrapolation off (4th order
/// solution propagated) and a standard step-size controller.
#[derive(Debug, Clone)]
pub struct Rkf45 {
    pub rtol: f64,
    pub atol: f64,
    pub h_min: f64,
    pub h_max: f64,
    k: [Vec<f64>; 6],
    tmp: Vec<f64>,
    y4: Vec<f64>,
}

const A: [[f64; 5]; 6] = [
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 4.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 32.0, 9.0 / 32.0, 0.0, 0.0, 0.0],
    [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0, 0.0, 0.0],
    [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0, 0.0],
    [-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0],
];
const B4: [f64; 6] = [25.0 / 216.0, 0.0, 1408.0 / 2565.0, 2197.0 / 4104.0, -1.0 / 5.0, 0.0];
const B5: [f64; 6] = [
    16.0 / 135.0,
    0.0,
    6656.0 / 12825.0,
    28561.0 / 56430.0,
    -9.0 / 50.0,
    2.0 / 55.0,
];

impl Rkf45 {
    pub fn new(dim: usize, rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            h_min: 1e-12,
            h_max: 1.0,
            k: std::array::from_fn(|_| vec![0.0; dim]),
            tmp: vec![0.0; dim],
            y4: vec![0.0; dim],
        }
    }

    /// Attempts one step of size `h`; on acceptance `y` is advanced.
    pub fn step<F>(&mut self, rhs: &F, y: &mut [f64], h: f64) -> AdaptiveStep
    where
        F: Fn(&[f64], &mut [f64]),
    {
        let n = y.len();
        for s in 0..6 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in self.k.iter().enumerate().take(s) {
                    acc += h * A[s][j] * kj[i];
                }
                self.tmp[i] = acc;
            }
            rhs(&self.tmp, &mut self.k[s]);
        }
        let mut err = 0.0f64;
        for i in 0..n {
            let mut d4 = 0.0;
            let mut d5 = 0.0;
            for s in 0..6 {
                d4 += B4[s] * self.k[s][i];
                d5 += B5[s] * self.k[s][i];
            }
            self.y4[i] = y[i] + h * d4;
            let scale = self.atol + self.rtol * y[i].abs().max(self.y4[i].abs());
            err = err.max((h * (d5 - d4)).abs() / scale);
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        let next = (h * factor).clamp(self.h_min, self.h_max);
        if err <= 1.0 && err.is_finite() {
            y.copy_from_slice(&self.y4);
            AdaptiveStep {
                accepted: true,
                taken: h,
                next,
            }
        } else {
            AdaptiveStep {
                accepted: false,
                taken: 0.0,
                next: if err.is_finite() { next } else { h * 0.2 },
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(y: &[f64], out: &mut [f64]) {
        out[0] = -y[0];
        out[1] = -2.0 * y[1];
    }

    #[test]
    fn rk4_matches_exponential() {
        let mut y = vec![1.0, 1.0];
        let mut rk = Rk4::new(2);
        for _ in 0..100 {
            rk.step(&decay, &mut y, 0.01);
        }
        assert!((y[0] - (-1.0f64).exp()).abs() < 1e-10);
        assert!((y[1] - (-2.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn rkf45_reaches_time_accurately() {
        let mut y = vec![1.0, 1.0];
        let mut rk = Rkf45::new(2, 1e-10, 1e-12);
        let (mut t, mut h) = (0.0, 0.01f64);
        while t < 3.0 {
            let h_try = h.min(3.0 - t);
            let s = rk.step(&decay, &mut y, h_try);
            t += s.taken;
            h = s.next;
        }
        assert!((y[0] - (-3.0f64).exp()).abs() < 1e-8);
        assert!((y[1] - (-6.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn rk4_leaves_equilibria_fixed() {
        let mut y = vec![0.0, 0.0];
        Rk4::new(2).step(&decay, &mut y, 0.5);
        assert_eq!(y, vec![0.0, 0.0]);
    }
}
