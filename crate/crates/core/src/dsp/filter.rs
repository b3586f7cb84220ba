use std::f64::consts::PI;

/// Second-order section, normalized so `a0 == 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

/// Transposed direct form II state of one section.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BiquadState {
    s1: f64,
    s2: f64,
}

impl BiquadState {
    #[inline]
    pub fn process(&mut self, c: &Biquad, x: f64) -> f64 {
        let y = c.b0 * x + self.s1;
        self.s1 = c.b1 * x - c.a1 * y + self.s2;
        self.s2 = c.b2 * x - c.a2 * y;
        y
    }
}

impl Biquad {
    fn normalized(b: [f64; 3], a: [f64; 3]) -> Self {
        Self {
            b0: b[0] / a[0],
            b1: b[1] / a[0],
            b2: b[2] / a[0],
            a1: a[1] / a[0],
            a2: a[2] / a[0],
        }
    }

    // Bilinear-transform sections with frequency prewarping (RBJ cookbook).

    pub fn highpass(fs: f64, f0: f64, q: f64) -> Self {
        let w0 = 2.0 * PI * f0 / fs;
        let (s, c) = w0.sin_cos();
        let alpha = s / (2.0 * q);
        Self::normalized(
            [(1.0 + c) / 2.0, -(1.0 + c), (1.0 + c) / 2.0],
            [1.0 + alpha, -2.0 * c, 1.0 - alpha],
        )
    }

    pub fn lowpass(fs: f64, f0: f64, q: f64) -> Self {
        let w0 = 2.0 * PI * f0 / fs;
        let (s, c) = w0.sin_cos();
        let alpha = s / (2.0 * q);
        Self::normalized(
            [(1.0 - c) / 2.0, 1.0 - c, (1.0 - c) / 2.0],
            [1.0 + alpha, -2.0 * c, 1.0 - alpha],
        )
    }

    pub fn notch(fs: f64, f0: f64, q: f64) -> Self {
        let w0 = 2.0 * PI * f0 / fs;
        let (s, c) = w0.sin_cos();
        let alpha = s / (2.0 * q);
        Self::normalized([1.0, -2.0 * c, 1.0], [1.0 + alpha, -2.0 * c, 1.0 - alpha])
    }

    /// Magnitude response at frequency `f`.
    pub fn gain_at(&self, fs: f64, f: f64) -> f64 {
        let w = 2.0 * PI * f / fs;
        // H(z) with z = e^{jw}
        let (c1, s1) = (w.cos(), -w.sin());
        let (c2, s2) = ((2.0 * w).cos(), -(2.0 * w).sin());
        let num = (
            self.b0 + self.b1 * c1 + self.b2 * c2,
            self.b1 * s1 + self.b2 * s2,
        );
        let den = (
            1.0 + self.a1 * c1 + self.a2 * c2,
            self.a1 * s1 + self.a2 * s2,
        );
        (num.0.hypot(num.1)) / (den.0.hypot(den.1))
    }
}

/// Q factors of the two sections of a 4th-order Butterworth response.
pub fn butterworth4_q() -> [f64; 2] {
    [
        1.0 / (2.0 * (PI / 8.0).cos()),
        1.0 / (2.0 * (3.0 * PI / 8.0).cos()),
    ]
}

/// Parameters of the preprocessing chain.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FilterSpec {
    pub sample_rate_hz: f64,
    pub highpass_hz: f64,
    pub notch_hz: f64,
    pub notch_q: f64,
}

impl Default for FilterSpec {
    fn default() -> Self {
        Self {
            sample_rate_hz: crate::stream::SAMPLE_RATE_HZ as f64,
            highpass_hz: 20.0,
            notch_hz: 60.0,
            notch_q: 30.0,
        }
    }
}

/// Per-channel cascade of a 4th-order Butterworth high-pass and a 60 Hz
/// notch, applied causally and independently to every channel.
#[derive(Debug, Clone)]
pub struct FilterChain {
    sections: [Biquad; 3],
    states: Vec<[BiquadState; 3]>,
}

impl FilterChain {
    pub fn new(spec: FilterSpec, n_channels: usize) -> Self {
        let [q1, q2] = butterworth4_q();
        let fs = spec.sample_rate_hz;
        Self {
            sections: [
                Biquad::highpass(fs, spec.highpass_hz, q1),
                Biquad::highpass(fs, spec.highpass_hz, q2),
                Biquad::notch(fs, spec.notch_hz, spec.notch_q),
            ],
            states: vec![[BiquadState::default(); 3]; n_channels],
        }
    }

    pub fn n_channels(&self) -> usize {
        self.states.len()
    }

    pub fn reset(&mut self) {
        self.states.iter_mut().for_each(|s| *s = Default::default());
    }

    pub fn sections(&self) -> &[Biquad; 3] {
        &self.sections
    }

    /// Analytic magnitude response of the whole cascade.
    pub fn gain_at(&self, fs: f64, f: f64) -> f64 {
        self.sections.iter().map(|s| s.gain_at(fs, f)).product()
    }

    /// Filters a sample-major block in place.
    pub fn process_block(&mut self, block: &mut [f64]) {
        let n = self.states.len();
        debug_assert_eq!(block.len() % n, 0);
        let [h1, h2, nt] = &self.sections;
        for sample in block.chunks_exact_mut(n) {
            for (x, st) in sample.iter_mut().zip(self.states.iter_mut()) {
                let y = st[0].process(h1, *x);
                let y = st[1].process(h2, y);
                *x = st[2].process(nt, y);
            }
        }
    }

    /// Filters one channel's signal in isolation (uses channel 0 state).
    pub fn process_signal(&mut self, signal: &[f64]) -> Vec<f64> {
        let [h1, h2, nt] = self.sections;
        let st = &mut self.states[0];
        signal
            .iter()
            .map(|&x| {
                let y = st[0].process(&h1, x);
                let y = st[1].process(&h2, y);
                st[2].process(&nt, y)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_response_meets_targets() {
        let chain = FilterChain::new(FilterSpec::default(), 1);
        let fs = 4000.0;
        assert!(chain.gain_at(fs, 60.0) < 10f64.powf(-30.0 / 20.0));
        let g100 = 20.0 * chain.gain_at(fs, 100.0).log10();
        assert!(g100.abs() < 1.0, "100 Hz gain {g100} dB");
        assert!(chain.gain_at(fs, 0.0) < 1e-12);
    }

    #[test]
    fn reset_reproduces_output() {
        let mut chain = FilterChain::new(FilterSpec::default(), 1);
        let x: Vec<f64> = (0..500).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let a = chain.process_signal(&x);
        chain.reset();
        let b = chain.process_signal(&x);
        assert_eq!(a, b);
    }

    #[test]
    fn channels_are_independent() {
        let mut chain = FilterChain::new(FilterSpec::default(), 2);
        let mut block: Vec<f64> = (0..200).flat_map(|i| [i as f64, 0.0]).collect();
        chain.process_block(&mut block);
        assert!(block.iter().skip(1).step_by(2).all(|&v| v == 0.0));
    }
}
