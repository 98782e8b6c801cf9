//! Step-wise iterative SNN forward model plus the continuous-form SRM
//! oracles used to validate it.
//!
//! Membrane dynamics per layer, per step, in this order:
//! `m <- alpha*m + input`, `h <- beta*h + input`, `r <- gamma*r + o_prev`,
//! `I = v0 * W (m - h)`, `V = I - v_th * r`, `o = 1 where V >= v_th`.
//! The `m`/`h` traces are stored once per presynaptic unit, not per synapse;
//! the per-synapse view is recovered through the weight multiply.

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::raster::SpikeRaster;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Membrane, synapse and reset time constants with their derived decay
/// factors. `v0` scales the peak of the double-exponential kernel to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeuronHyperParams {
    pub tau_m: f64,
    pub tau_s: f64,
    pub tau_reset: f64,
    pub v_th: f64,
    alpha: f64,
    beta: f64,
    gamma: f64,
    eta: f64,
    v0: f64,
}

impl NeuronHyperParams {
    pub fn new(tau_m: f64, tau_s: f64, tau_reset: f64, v_th: f64) -> Result<Self> {
        if !(tau_s > 0.0 && tau_m > tau_s) {
            return Err(Error::InvalidParameter(format!(
                "need tau_m > tau_s > 0, got tau_m={tau_m}, tau_s={tau_s}"
            )));
        }
        if tau_reset <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "need tau_reset > 0, got {tau_reset}"
            )));
        }
        if v_th <= 0.0 {
            return Err(Error::InvalidParameter(format!("need v_th > 0, got {v_th}")));
        }
        let eta = tau_m / tau_s;
        // eta^(eta/(eta-1)) alone leaves the kernel peak at eta-1; the extra
        // 1/(eta-1) makes max K(t) exactly 1 for every eta > 1.
        let v0 = eta.powf(eta / (eta - 1.0)) / (eta - 1.0);
        Ok(NeuronHyperParams {
            tau_m,
            tau_s,
            tau_reset,
            v_th,
            alpha: (-1.0 / tau_m).exp(),
            beta: (-1.0 / tau_s).exp(),
            gamma: (-1.0 / tau_reset).exp(),
            eta,
            v0,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    /// Argmax of the kernel: `ln(eta) * tau_m * tau_s / (tau_m - tau_s)`.
    pub fn kernel_peak_time(&self) -> f64 {
        self.eta.ln() * self.tau_m * self.tau_s / (self.tau_m - self.tau_s)
    }
}

impl Default for NeuronHyperParams {
    fn default() -> Self {
        NeuronHyperParams::new(20.0, 5.0, 20.0, 1.0).unwrap()
    }
}

/// PSP kernel `K(t) = v0 * (e^{-t/tau_m} - e^{-t/tau_s})`. Zero at t=0,
/// peaks at 1, effectively zero after a few tau_m.
pub fn kernel_value(t: f64, hyper: &NeuronHyperParams) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::InvalidParameter(format!("kernel time {t} < 0")));
    }
    Ok(hyper.v0 * ((-t / hyper.tau_m).exp() - (-t / hyper.tau_s).exp()))
}

/// Direct-convolution SRM potential, the slow oracle for `layer_step`.
///
/// Input spikes at `t_j` contribute `w * K(t - t_j)`. An output spike at
/// `t_s` is applied from the following step (the iterative model consumes
/// `O[t-1]`), contributing `-v_th * gamma^(t - t_s - 1)`.
pub fn srm_reference_potential(
    input_spike_times: &[Vec<u32>],
    output_spike_times: &[u32],
    weights: &[f64],
    t: u32,
    hyper: &NeuronHyperParams,
) -> Result<f64> {
    if input_spike_times.len() != weights.len() {
        return Err(Error::Dimension(format!(
            "{} spike trains vs {} weights",
            input_spike_times.len(),
            weights.len()
        )));
    }
    let mut v = 0.0;
    for (train, w) in input_spike_times.iter().zip(weights) {
        let mut psp = 0.0;
        for &tj in train.iter().filter(|&&tj| tj <= t) {
            psp += kernel_value((t - tj) as f64, hyper)?;
        }
        v += w * psp;
    }
    for &ts in output_spike_times.iter().filter(|&&ts| ts < t) {
        v -= hyper.v_th * hyper.gamma.powi((t - ts - 1) as i32);
    }
    Ok(v)
}

/// How spikes are emitted: hard threshold, or the graded sigmoid used for
/// gradient checking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpikeMode {
    Binary,
    Smoothed { temperature: f64 },
}

fn stable_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone)]
pub struct LayerParams {
    pub weights: Matrix,
    pub hyper: NeuronHyperParams,
}

impl LayerParams {
    pub fn n_in(&self) -> usize {
        self.weights.cols()
    }

    pub fn n_out(&self) -> usize {
        self.weights.rows()
    }
}

/// Mutable per-layer simulation state. `o` holds the previous step's output
/// until `layer_step` overwrites it; in smoothed mode it is graded in [0,1].
#[derive(Debug, Clone)]
pub struct LayerState {
    pub m: Vec<f64>,
    pub h: Vec<f64>,
    pub r: Vec<f64>,
    pub v: Vec<f64>,
    pub o: Vec<f64>,
    mh_diff: Vec<f64>,
}

impl LayerState {
    pub fn new(n_in: usize, n_out: usize) -> Self {
        LayerState {
            m: vec![0.0; n_in],
            h: vec![0.0; n_in],
            r: vec![0.0; n_out],
            v: vec![0.0; n_out],
            o: vec![0.0; n_out],
            mh_diff: vec![0.0; n_in],
        }
    }

    pub fn reset_state(&mut self) {
        self.m.fill(0.0);
        self.h.fill(0.0);
        self.r.fill(0.0);
        self.v.fill(0.0);
        self.o.fill(0.0);
    }
}

/// One discrete time step of one layer. See the module docs for the update
/// order; the reset trace consumes the previous step's output.
pub fn layer_step(
    params: &LayerParams,
    state: &mut LayerState,
    input: &[f64],
    mode: SpikeMode,
) -> Result<()> {
    if input.len() != params.n_in() {
        return Err(Error::Dimension(format!(
            "layer_step: input length {} != {}",
            input.len(),
            params.n_in()
        )));
    }
    let hp = &params.hyper;
    for (m, x) in state.m.iter_mut().zip(input) {
        *m = hp.alpha * *m + x;
    }
    for (h, x) in state.h.iter_mut().zip(input) {
        *h = hp.beta * *h + x;
    }
    for (r, o_prev) in state.r.iter_mut().zip(&state.o) {
        *r = hp.gamma * *r + o_prev;
    }
    for (d, (m, h)) in state.mh_diff.iter_mut().zip(state.m.iter().zip(&state.h)) {
        *d = m - h;
    }
    params.weights.matvec_into(&state.mh_diff, &mut state.v)?;
    for (v, r) in state.v.iter_mut().zip(&state.r) {
        *v = hp.v0 * *v - hp.v_th * r;
    }
    match mode {
        SpikeMode::Binary => {
            for (o, v) in state.o.iter_mut().zip(&state.v) {
                *o = if *v >= hp.v_th { 1.0 } else { 0.0 };
            }
        }
        SpikeMode::Smoothed { temperature } => {
            for (o, v) in state.o.iter_mut().zip(&state.v) {
                *o = stable_sigmoid((*v - hp.v_th) / temperature);
            }
        }
    }
    Ok(())
}

/// Per-layer, per-step snapshots of everything the backward sweep consumes.
#[derive(Debug, Clone)]
pub struct LayerTrace {
    pub o: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub m: Vec<Vec<f64>>,
    pub h: Vec<Vec<f64>>,
    pub r: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct ForwardHistory {
    pub layers: Vec<LayerTrace>,
    pub num_steps: usize,
    pub mode: SpikeMode,
}

/// A stack of fully connected spiking layers.
#[derive(Debug, Clone)]
pub struct Network {
    pub layers: Vec<LayerParams>,
}

impl Network {
    /// `sizes` = [inputs, hidden..., outputs]. Weights are uniform in
    /// [-k, k] with k = sqrt(6/(n_in + n_out)), seeded, so initial
    /// potentials sit near threshold scale and early spikes exist.
    pub fn seeded(sizes: &[usize], hyper: NeuronHyperParams, seed: u64) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::InvalidParameter(
                "network needs at least input and output sizes".into(),
            ));
        }
        if sizes.iter().any(|&s| s == 0) {
            return Err(Error::InvalidParameter("zero-width layer".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::new();
        for w in sizes.windows(2) {
            let (n_in, n_out) = (w[0], w[1]);
            let k = (6.0 / (n_in + n_out) as f64).sqrt();
            let data: Vec<f64> = (0..n_in * n_out).map(|_| rng.gen_range(-k..k)).collect();
            layers.push(LayerParams {
                weights: Matrix::from_vec(n_out, n_in, data)?,
                hyper,
            });
        }
        Ok(Network { layers })
    }

    /// [n_0, n_1, ..., n_L]
    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.layers[0].n_in()];
        sizes.extend(self.layers.iter().map(|l| l.n_out()));
        sizes
    }

    pub fn num_inputs(&self) -> usize {
        self.layers[0].n_in()
    }

    pub fn num_outputs(&self) -> usize {
        self.layers.last().map_or(0, |l| l.n_out())
    }

    pub fn fresh_states(&self) -> Vec<LayerState> {
        self.layers
            .iter()
            .map(|l| LayerState::new(l.n_in(), l.n_out()))
            .collect()
    }

    pub fn check_consistent(&self) -> Result<()> {
        for pair in self.layers.windows(2) {
            if pair[0].n_out() != pair[1].n_in() {
                return Err(Error::Dimension(format!(
                    "layer output {} feeds layer input {}",
                    pair[0].n_out(),
                    pair[1].n_in()
                )));
            }
        }
        Ok(())
    }
}

/// Runs the input raster through all layers; spikes propagate through the
/// whole stack within each time step. Returns per-output spike counts (the
/// quantity the softmax readout consumes) and, when `record` is set, the
/// full unrolled history for BPTT.
pub fn forward(
    net: &Network,
    input: &SpikeRaster,
    record: bool,
    mode: SpikeMode,
) -> Result<(Vec<f64>, Option<ForwardHistory>)> {
    net.check_consistent()?;
    if input.num_units() != net.num_inputs() {
        return Err(Error::Dimension(format!(
            "raster has {} units, network expects {}",
            input.num_units(),
            net.num_inputs()
        )));
    }
    let steps = input.num_steps();
    let mut states = net.fresh_states();
    let mut history = record.then(|| ForwardHistory {
        layers: net
            .layers
            .iter()
            .map(|_| LayerTrace {
                o: Vec::with_capacity(steps),
                v: Vec::with_capacity(steps),
                m: Vec::with_capacity(steps),
                h: Vec::with_capacity(steps),
                r: Vec::with_capacity(steps),
            })
            .collect(),
        num_steps: steps,
        mode,
    });
    let mut counts = vec![0.0; net.num_outputs()];
    let mut input_buf = vec![0.0; net.num_inputs()];
    for t in 0..steps {
        input.fill_step(t, &mut input_buf);
        for (l, (params, state)) in net.layers.iter().zip(states.iter_mut()).enumerate() {
            if l == 0 {
                layer_step(params, state, &input_buf, mode)?;
            } else {
                // Split borrow: the previous layer's fresh output feeds this one.
                let (prev, rest) = states.split_at_mut(l);
                let state = &mut rest[0];
                layer_step(params, state, &prev[l - 1].o, mode)?;
            }
        }
        for (c, o) in counts.iter_mut().zip(&states.last().unwrap().o) {
            *c += o;
        }
        if let Some(hist) = history.as_mut() {
            for (trace, state) in hist.layers.iter_mut().zip(&states) {
                trace.o.push(state.o.clone());
                trace.v.push(state.v.clone());
                trace.m.push(state.m.clone());
                trace.h.push(state.h.clone());
                trace.r.push(state.r.clone());
            }
        }
    }
    Ok((counts, history))
}

/// Max over the train of |V0(M-H) - direct kernel convolution|: the
/// incremental-PSP identity that justifies the iterative model.
pub fn psp_incremental_vs_convolution_check(train: &[bool], hyper: &NeuronHyperParams) -> f64 {
    let spike_times: Vec<usize> = train
        .iter()
        .enumerate()
        .filter_map(|(t, &s)| s.then_some(t))
        .collect();
    let mut m = 0.0f64;
    let mut h = 0.0f64;
    let mut worst: f64 = 0.0;
    for (t, &s) in train.iter().enumerate() {
        let input = if s { 1.0 } else { 0.0 };
        m = hyper.alpha * m + input;
        h = hyper.beta * h + input;
        let incremental = hyper.v0 * (m - h);
        let convolution: f64 = spike_times
            .iter()
            .filter(|&&ti| ti <= t)
            .map(|&ti| kernel_value((t - ti) as f64, hyper).expect("t >= ti"))
            .sum();
        worst = worst.max((incremental - convolution).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{SpikeEvent, SpikeRaster};
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    #[test]
    fn hyper_validation() {
        assert!(NeuronHyperParams::new(5.0, 20.0, 20.0, 1.0).is_err()); // tau_m < tau_s
        assert!(NeuronHyperParams::new(20.0, 0.0, 20.0, 1.0).is_err());
        assert!(NeuronHyperParams::new(20.0, 5.0, -1.0, 1.0).is_err());
        assert!(NeuronHyperParams::new(20.0, 5.0, 20.0, 0.0).is_err());
        let hp = NeuronHyperParams::default();
        assert!(hp.beta() < hp.alpha() && hp.alpha() < 1.0);
        assert!(hp.gamma() > 0.0 && hp.gamma() < 1.0);
        assert_abs_diff_eq!(hp.eta(), 4.0, epsilon = 1e-15);
    }

    #[test]
    fn kernel_zero_at_origin_and_rejects_negative() {
        let hp = NeuronHyperParams::default();
        assert_eq!(kernel_value(0.0, &hp).unwrap(), 0.0);
        assert!(kernel_value(-0.1, &hp).is_err());
    }

    #[test]
    fn kernel_peaks_at_one() {
        let hp = NeuronHyperParams::default();
        let t_peak = hp.kernel_peak_time();
        assert_abs_diff_eq!(kernel_value(t_peak, &hp).unwrap(), 1.0, epsilon = 1e-9);
        // Grid search never exceeds the closed-form peak.
        let grid_max = (0..4000)
            .map(|i| kernel_value(i as f64 * 0.05, &hp).unwrap())
            .fold(f64::MIN, f64::max);
        assert!(grid_max <= 1.0 + 1e-9);
        assert_abs_diff_eq!(grid_max, 1.0, epsilon = 1e-3);
    }

    #[test]
    fn kernel_normalized_for_random_constants() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let tau_s = rng.gen_range(1.0..15.0);
            let eta = rng.gen_range(1.05..10.0);
            let hp = NeuronHyperParams::new(tau_s * eta, tau_s, 20.0, 1.0).unwrap();
            let peak = kernel_value(hp.kernel_peak_time(), &hp).unwrap();
            assert_abs_diff_eq!(peak, 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn kernel_decays_to_effectively_zero() {
        let hp = NeuronHyperParams::default();
        assert!(kernel_value(10.0 * hp.tau_m, &hp).unwrap() < 1e-4);
    }

    #[test]
    fn srm_no_inputs_is_zero() {
        let hp = NeuronHyperParams::default();
        let v = srm_reference_potential(&[vec![]], &[], &[1.0], 10, &hp).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn srm_single_spike_is_kernel() {
        let hp = NeuronHyperParams::default();
        for t in 0..50 {
            let v = srm_reference_potential(&[vec![0]], &[], &[1.0], t, &hp).unwrap();
            assert_abs_diff_eq!(v, kernel_value(t as f64, &hp).unwrap(), epsilon = 1e-12);
        }
    }

    fn single_neuron_layer(w: f64, hyper: NeuronHyperParams) -> LayerParams {
        LayerParams {
            weights: Matrix::from_vec(1, 1, vec![w]).unwrap(),
            hyper,
        }
    }

    #[test]
    fn layer_step_quiescent() {
        let params = single_neuron_layer(0.5, NeuronHyperParams::default());
        let mut state = LayerState::new(1, 1);
        for _ in 0..10 {
            layer_step(&params, &mut state, &[0.0], SpikeMode::Binary).unwrap();
        }
        assert_eq!(state.v[0], 0.0);
        assert_eq!(state.o[0], 0.0);
        assert_eq!(state.m[0], 0.0);
    }

    #[test]
    fn first_spike_matches_closed_form() {
        // After a single input spike at t=0, V[n] = v0*w*(alpha^n - beta^n);
        // the first output spike lands on the first n where that reaches v_th.
        let hp = NeuronHyperParams::default();
        let w = 2.0;
        let expected_step = (1..200)
            .find(|&n| hp.v0() * w * (hp.alpha().powi(n) - hp.beta().powi(n)) >= hp.v_th)
            .unwrap();
        let params = single_neuron_layer(w, hp);
        let mut state = LayerState::new(1, 1);
        let mut first_spike = None;
        for n in 0..200 {
            let input = if n == 0 { 1.0 } else { 0.0 };
            layer_step(&params, &mut state, &[input], SpikeMode::Binary).unwrap();
            if state.o[0] > 0.0 {
                first_spike = Some(n);
                break;
            }
        }
        assert_eq!(first_spike, Some(expected_step as usize));
    }

    #[test]
    fn reset_reduces_next_potential_by_threshold() {
        // Drive one spike, then compare against a counterfactual neuron that
        // never crosses threshold: at t+1 the difference is exactly v_th * 1.
        let hp = NeuronHyperParams::default();
        let hp_blocked = NeuronHyperParams::new(20.0, 5.0, 20.0, 1e18).unwrap();
        let params = single_neuron_layer(3.0, hp);
        let blocked = single_neuron_layer(3.0, hp_blocked);
        let mut st = LayerState::new(1, 1);
        let mut st_blocked = LayerState::new(1, 1);
        let mut spike_step = None;
        for n in 0..100 {
            let input = if n == 0 { 1.0 } else { 0.0 };
            layer_step(&params, &mut st, &[input], SpikeMode::Binary).unwrap();
            layer_step(&blocked, &mut st_blocked, &[input], SpikeMode::Binary).unwrap();
            if let Some(ts) = spike_step {
                if n == ts + 1 {
                    assert_abs_diff_eq!(st_blocked.v[0] - st.v[0], hp.v_th, epsilon = 1e-12);
                    return;
                }
            } else if st.o[0] > 0.0 {
                spike_step = Some(n);
            }
        }
        panic!("no spike occurred");
    }

    #[test]
    fn layer_potential_matches_srm_oracle() {
        let hp = NeuronHyperParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..5 {
            let n_in = rng.gen_range(1..4usize);
            let weights: Vec<f64> = (0..n_in).map(|_| rng.gen_range(-1.0..2.0)).collect();
            let trains: Vec<Vec<u32>> = (0..n_in)
                .map(|_| (0..50u32).filter(|_| rng.gen_bool(0.2)).collect())
                .collect();
            let params = LayerParams {
                weights: Matrix::from_vec(1, n_in, weights.clone()).unwrap(),
                hyper: hp,
            };
            let mut state = LayerState::new(n_in, 1);
            let mut output_spikes: Vec<u32> = Vec::new();
            for t in 0..50u32 {
                let input: Vec<f64> = trains
                    .iter()
                    .map(|tr| if tr.contains(&t) { 1.0 } else { 0.0 })
                    .collect();
                layer_step(&params, &mut state, &input, SpikeMode::Binary).unwrap();
                let oracle =
                    srm_reference_potential(&trains, &output_spikes, &weights, t, &hp).unwrap();
                assert_abs_diff_eq!(state.v[0], oracle, epsilon = 1e-9);
                if state.o[0] > 0.0 {
                    output_spikes.push(t);
                }
            }
        }
    }

    #[test]
    fn forward_empty_raster_is_silent() {
        let hp = NeuronHyperParams::default();
        let net = Network::seeded(&[3, 5, 2], hp, 1).unwrap();
        let raster = SpikeRaster::empty(3, 20);
        let (counts, _) = forward(&net, &raster, false, SpikeMode::Binary).unwrap();
        assert_eq!(counts, vec![0.0, 0.0]);
    }

    #[test]
    fn forward_matches_hand_simulation() {
        // One layer, two inputs, one neuron; replay the recurrences by hand.
        let hp = NeuronHyperParams::default();
        let w = vec![1.5, -0.5];
        let net = Network {
            layers: vec![LayerParams {
                weights: Matrix::from_vec(1, 2, w.clone()).unwrap(),
                hyper: hp,
            }],
        };
        let raster = SpikeRaster::from_events(
            2,
            5,
            vec![
                SpikeEvent { step: 0, unit: 0 },
                SpikeEvent { step: 1, unit: 1 },
                SpikeEvent { step: 2, unit: 0 },
            ],
        )
        .unwrap();
        let (counts, _) = forward(&net, &raster, false, SpikeMode::Binary).unwrap();

        let (mut m, mut h) = (vec![0.0f64; 2], vec![0.0f64; 2]);
        let (mut r, mut o_prev) = (0.0f64, 0.0f64);
        let mut expected = 0.0;
        for t in 0..5 {
            let input = [
                if raster.is_active(0, t) { 1.0 } else { 0.0 },
                if raster.is_active(1, t) { 1.0 } else { 0.0 },
            ];
            for j in 0..2 {
                m[j] = hp.alpha() * m[j] + input[j];
                h[j] = hp.beta() * h[j] + input[j];
            }
            r = hp.gamma() * r + o_prev;
            let i_cur: f64 = (0..2).map(|j| w[j] * (m[j] - h[j])).sum();
            let v = hp.v0() * i_cur - hp.v_th * r;
            o_prev = if v >= hp.v_th { 1.0 } else { 0.0 };
            expected += o_prev;
        }
        assert_eq!(counts[0], expected);
    }

    #[test]
    fn forward_is_deterministic() {
        let hp = NeuronHyperParams::default();
        let net = Network::seeded(&[4, 6, 3], hp, 9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut events = Vec::new();
        for step in 0..30u32 {
            for unit in 0..4u32 {
                if rng.gen_bool(0.3) {
                    events.push(SpikeEvent { step, unit });
                }
            }
        }
        let raster = SpikeRaster::from_events(4, 30, events).unwrap();
        let (c1, h1) = forward(&net, &raster, true, SpikeMode::Binary).unwrap();
        let (c2, h2) = forward(&net, &raster, true, SpikeMode::Binary).unwrap();
        assert_eq!(c1, c2);
        let (h1, h2) = (h1.unwrap(), h2.unwrap());
        for (a, b) in h1.layers.iter().zip(&h2.layers) {
            assert_eq!(a.v, b.v);
            assert_eq!(a.o, b.o);
        }
    }

    #[test]
    fn traces_stay_nonnegative() {
        let hp = NeuronHyperParams::default();
        let net = Network::seeded(&[3, 4], hp, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut states = net.fresh_states();
        for _ in 0..100 {
            let input: Vec<f64> = (0..3).map(|_| f64::from(rng.gen_bool(0.4))).collect();
            layer_step(&net.layers[0], &mut states[0], &input, SpikeMode::Binary).unwrap();
            assert!(states[0].m.iter().all(|&x| x >= 0.0));
            assert!(states[0].h.iter().all(|&x| x >= 0.0));
            assert!(states[0].r.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn potential_linear_in_weights_without_spikes() {
        // With the threshold unreachable, scaling all weights scales V.
        let hp = NeuronHyperParams::new(20.0, 5.0, 20.0, 1e18).unwrap();
        let scale = 2.5;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let base: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let scaled: Vec<f64> = base.iter().map(|w| w * scale).collect();
        let p1 = LayerParams {
            weights: Matrix::from_vec(2, 3, base).unwrap(),
            hyper: hp,
        };
        let p2 = LayerParams {
            weights: Matrix::from_vec(2, 3, scaled).unwrap(),
            hyper: hp,
        };
        let mut s1 = LayerState::new(3, 2);
        let mut s2 = LayerState::new(3, 2);
        for t in 0..60 {
            let input: Vec<f64> = (0..3).map(|j| f64::from((t + j) % 3 == 0)).collect();
            layer_step(&p1, &mut s1, &input, SpikeMode::Binary).unwrap();
            layer_step(&p2, &mut s2, &input, SpikeMode::Binary).unwrap();
            for i in 0..2 {
                assert_abs_diff_eq!(s2.v[i], scale * s1.v[i], epsilon = 1e-12 * s1.v[i].abs().max(1.0));
            }
        }
    }

    #[test]
    fn psp_check_empty_and_single_spike() {
        let hp = NeuronHyperParams::default();
        assert_eq!(psp_incremental_vs_convolution_check(&[false; 50], &hp), 0.0);
        let mut train = vec![false; 80];
        train[0] = true;
        assert!(psp_incremental_vs_convolution_check(&train, &hp) <= 1e-12);
    }

    #[test]
    fn psp_check_random_train() {
        let hp = NeuronHyperParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let train: Vec<bool> = (0..1000).map(|_| rng.gen_bool(0.1)).collect();
        assert!(psp_incremental_vs_convolution_check(&train, &hp) <= 1e-9);
    }

    #[test]
    fn smoothed_mode_emits_graded_output() {
        let params = single_neuron_layer(2.0, NeuronHyperParams::default());
        let mut state = LayerState::new(1, 1);
        layer_step(&params, &mut state, &[1.0], SpikeMode::Smoothed { temperature: 1.0 }).unwrap();
        assert!(state.o[0] > 0.0 && state.o[0] < 1.0);
    }
}
