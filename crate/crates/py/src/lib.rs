use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use treecodes::channel::{self, ChannelModel};
use treecodes::harness::{self, to_csv_string, CampaignConfig};
use treecodes::seqdec::{stack_decode, DecoderLimits, MetricConfig};
use treecodes::treecode::{self, BitBlock};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn bsc(p: f64) -> PyResult<ChannelModel> {
    ChannelModel::bsc(p).map_err(err)
}

#[pyfunction]
fn cutoff_rate(p: f64) -> PyResult<f64> {
    Ok(channel::cutoff_rate(&bsc(p)?))
}

/// `(E_G(R), ρ*)` on BSC(p).
#[pyfunction]
fn gallager_exponent(p: f64, rate: f64) -> PyResult<(f64, f64)> {
    let r = channel::gallager_exponent(&bsc(p)?, rate);
    Ok((r.value, r.rho_star))
}

/// `(E_J(B, R), ρ*)` on BSC(p).
#[pyfunction]
fn jelinek_exponent(p: f64, bias: f64, rate: f64) -> PyResult<(f64, f64)> {
    let r = channel::jelinek_exponent(&bsc(p)?, bias, rate);
    Ok((r.value, r.rho_star))
}

#[pyfunction]
fn pareto_exponent(p: f64, rate: f64) -> PyResult<f64> {
    channel::pareto_exponent(&bsc(p)?, rate).map_err(err)
}

/// A code drawn from the LTI ensemble.
#[pyclass]
struct LtiCode {
    inner: treecode::LtiCode,
}

#[pymethods]
impl LtiCode {
    #[new]
    #[pyo3(signature = (n, k, horizon, seed, affine = false))]
    fn new(n: usize, k: usize, horizon: usize, seed: u64, affine: bool) -> PyResult<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inner = treecode::sample_lti(n, k, horizon, affine, &mut rng).map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Self { inner: treecode::LtiCode::from_text(text).map_err(err)? })
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn horizon(&self) -> usize {
        self.inner.horizon()
    }

    /// Code words for message words `b_1..b_t`, each packed LSB first.
    fn encode(&self, messages: Vec<u64>) -> PyResult<Vec<u64>> {
        let k = self.inner.k();
        let blocks = messages.into_iter().map(|m| BitBlock::new(m, k)).collect::<Result<Vec<_>, _>>().map_err(err)?;
        Ok(self.inner.encode_prefix(&blocks).map_err(err)?.iter().map(BitBlock::bits).collect())
    }

    /// Stack-decodes BSC(p) outputs given as received code words. Returns
    /// the decoded message words and the per-depth work.
    #[pyo3(signature = (received, p, bias = None, max_nodes = 1_000_000))]
    fn decode(&self, received: Vec<u64>, p: f64, bias: Option<f64>, max_nodes: u64) -> PyResult<(Vec<u64>, Vec<u64>)> {
        let ch = bsc(p)?;
        let n = self.inner.n();
        let z: Vec<Vec<usize>> =
            received.iter().map(|&w| (0..n).map(|j| ((w >> j) & 1) as usize).collect()).collect();
        let cfg = MetricConfig::new(bias.unwrap_or_else(|| channel::cutoff_rate(&ch)), 0.0).map_err(err)?;
        let limits = DecoderLimits { max_nodes, ..DecoderLimits::default() };
        let res = stack_decode(&self.inner, &ch, &z, &cfg, &limits).map_err(err)?;
        Ok((res.decoded.iter().map(BitBlock::bits).collect(), res.work))
    }
}

/// Runs a campaign (`exponents`, `anytime`, `complexity` or `control`)
/// from TOML text and returns its CSV.
#[pyfunction]
#[pyo3(signature = (command, config = "", seed = 0, workers = 1))]
fn run_campaign(py: Python<'_>, command: &str, config: &str, seed: u64, workers: usize) -> PyResult<String> {
    let cfg = CampaignConfig::parse(config).map_err(err)?;
    let command = command.to_owned();
    py.detach(move || match command.as_str() {
        "exponents" => {
            let (meta, rows) = harness::run_exponents(&cfg, seed)?;
            to_csv_string(&meta, &rows)
        }
        "anytime" => {
            let (meta, p) = harness::run_anytime(&cfg, seed, workers)?;
            to_csv_string(&meta, &p.rows)
        }
        "complexity" => {
            let (meta, r) = harness::run_complexity(&cfg, seed, workers)?;
            to_csv_string(&meta, &r.rows)
        }
        "control" => {
            let (meta, r) = harness::run_control(&cfg, seed, workers)?;
            to_csv_string(&meta, &r.trials)
        }
        other => Err(treecodes::Error::Config(format!("unknown campaign '{other}'"))),
    })
    .map_err(err)
}

#[pymodule]
fn pytreecodes(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(cutoff_rate, m)?)?;
    m.add_function(wrap_pyfunction!(gallager_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(jelinek_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(pareto_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(run_campaign, m)?)?;
    m.add_class::<LtiCode>()?;
    Ok(())
}
