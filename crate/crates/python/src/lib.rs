//! Python module `rmfec`: encoding, blank-schedule decoding, simulation and
//! packet framing over `bytes` payloads.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use rmfec::sim::{summarize, Simulator};
use rmfec::{Algorithm, ErasurePattern, PacketBlock, TrialConfig};

create_exception!(
    rmfec,
    DecodeError,
    PyException,
    "Erasures could not be recovered."
);

fn value_error(e: rmfec::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn algorithm(name: &str) -> PyResult<Algorithm> {
    name.parse().map_err(value_error)
}

fn params(r: u32, m: u32) -> PyResult<rmfec::CodeParams> {
    rmfec::code_params(r, m).map_err(value_error)
}

/// Dimensions of RM(r, m).
#[pyclass(name = "CodeParams", frozen, eq, skip_from_py_object)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PyCodeParams(rmfec::CodeParams);

#[pymethods]
impl PyCodeParams {
    #[new]
    fn new(r: u32, m: u32) -> PyResult<Self> {
        params(r, m).map(Self)
    }

    #[getter]
    fn r(&self) -> u32 {
        self.0.r()
    }

    #[getter]
    fn m(&self) -> u32 {
        self.0.m()
    }

    #[getter]
    fn k(&self) -> usize {
        self.0.k()
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn rate(&self) -> f64 {
        self.0.rate()
    }

    fn __repr__(&self) -> String {
        format!(
            "CodeParams(r={}, m={}, k={}, n={})",
            self.0.r(),
            self.0.m(),
            self.0.k(),
            self.0.n()
        )
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }
}

/// Pattern-only decode plan; replay it over any block with the same erasures.
#[pyclass(name = "Schedule", frozen)]
pub struct PySchedule {
    inner: rmfec::Schedule,
    params: rmfec::CodeParams,
}

#[pymethods]
impl PySchedule {
    #[getter]
    fn success(&self) -> bool {
        self.inner.success()
    }

    /// Known mask after decoding.
    #[getter]
    fn recovered(&self) -> Vec<bool> {
        self.inner.recovered_mask().as_slice().to_vec()
    }

    /// `(copies, xors)` over the whole schedule.
    fn op_count(&self) -> (usize, usize) {
        let c = rmfec::op_count(&self.inner);
        (c.copies, c.xors)
    }

    fn serialize(&self) -> Vec<u8> {
        self.inner.serialize_ops()
    }

    /// Fills every recoverable slot of `packets` (None marks an erasure).
    fn replay(
        &self,
        py: Python<'_>,
        packets: Vec<Option<Vec<u8>>>,
    ) -> PyResult<Vec<Option<Vec<u8>>>> {
        let block = to_block(self.params, packets)?;
        let out = py
            .detach(|| rmfec::replay(&self.inner, &block))
            .map_err(value_error)?;
        Ok(out.into_slots())
    }

    fn __repr__(&self) -> String {
        let c = rmfec::op_count(&self.inner);
        format!(
            "Schedule({}, success={}, copies={}, xors={})",
            self.params,
            self.inner.success(),
            c.copies,
            c.xors
        )
    }
}

fn to_block(params: rmfec::CodeParams, packets: Vec<Option<Vec<u8>>>) -> PyResult<PacketBlock> {
    let z = packets.iter().flatten().map(Vec::len).next().unwrap_or(0);
    PacketBlock::new(params, z, packets).map_err(value_error)
}

/// Encoder and decoder for one code, with cached matrices.
#[pyclass(name = "Codec", frozen)]
pub struct PyCodec(rmfec::Codec);

#[pymethods]
impl PyCodec {
    #[new]
    fn new(r: u32, m: u32) -> PyResult<Self> {
        Ok(Self(rmfec::Codec::new(params(r, m)?)))
    }

    #[getter]
    fn params(&self) -> PyCodeParams {
        PyCodeParams(*self.0.params())
    }

    /// Encodes k equal-length payloads into n packets.
    fn encode(&self, py: Python<'_>, source: Vec<Vec<u8>>) -> PyResult<Vec<Vec<u8>>> {
        let params = *self.0.params();
        let block = py
            .detach(|| rmfec::encode_block(&source, &params))
            .map_err(value_error)?;
        Ok(block.into_slots().into_iter().flatten().collect())
    }

    #[pyo3(signature = (known, algorithm = "full_ge_hybrid"))]
    fn schedule(&self, known: Vec<bool>, algorithm: &str) -> PyResult<PySchedule> {
        let alg = self::algorithm(algorithm)?;
        let pattern = ErasurePattern::from_known(known);
        let inner = self
            .0
            .build_schedule(&pattern, &alg.decode_options(), alg.policy())
            .map_err(value_error)?;
        Ok(PySchedule {
            inner,
            params: *self.0.params(),
        })
    }

    #[pyo3(signature = (known, algorithm = "full_ge_hybrid"))]
    fn decodable(&self, known: Vec<bool>, algorithm: &str) -> PyResult<bool> {
        let alg = self::algorithm(algorithm)?;
        self.0
            .decodable(
                &ErasurePattern::from_known(known),
                &alg.decode_options(),
                alg.policy(),
            )
            .map_err(value_error)
    }

    /// Recovers the k source payloads; raises DecodeError when the
    /// erasures are beyond the chosen algorithm.
    #[pyo3(signature = (packets, algorithm = "full_ge_hybrid"))]
    fn decode(
        &self,
        py: Python<'_>,
        packets: Vec<Option<Vec<u8>>>,
        algorithm: &str,
    ) -> PyResult<Vec<Vec<u8>>> {
        let alg = self::algorithm(algorithm)?;
        let block = to_block(*self.0.params(), packets)?;
        let replayed = py
            .detach(|| {
                let s =
                    self.0
                        .build_schedule(&block.pattern(), &alg.decode_options(), alg.policy())?;
                rmfec::replay_with_message(&s, &block)
            })
            .map_err(value_error)?;
        replayed.message.ok_or_else(|| {
            DecodeError::new_err(format!(
                "{} of {} packets received, {} could not recover the block",
                block.pattern().known_count(),
                block.params().n(),
                alg
            ))
        })
    }
}

#[pyfunction]
fn code_params(r: u32, m: u32) -> PyResult<PyCodeParams> {
    PyCodeParams::new(r, m)
}

/// Encodes one message of bits (`list[bool]`) with the Plotkin encoder.
#[pyfunction]
fn encode_bits(bits: Vec<bool>, r: u32, m: u32) -> PyResult<Vec<bool>> {
    rmfec::plotkin_encode(&bits, &params(r, m)?).map_err(value_error)
}

/// Mean overhead and failure curve over seeded random arrival orders.
#[pyfunction]
#[pyo3(signature = (r, m, algorithm = "full", trials = 1000, seed = 1, max_extra = None))]
fn simulate(
    py: Python<'_>,
    r: u32,
    m: u32,
    algorithm: &str,
    trials: usize,
    seed: u64,
    max_extra: Option<usize>,
) -> PyResult<SimulationResult> {
    let params = params(r, m)?;
    let config = TrialConfig {
        params,
        algorithm: self::algorithm(algorithm)?,
        trials,
        seed,
        max_extra: max_extra.unwrap_or_else(|| params.k().div_ceil(5).min(params.n() - params.k())),
    };
    let needed = py
        .detach(|| Simulator::new(params).needed_per_trial(&config))
        .map_err(value_error)?;
    let stats = summarize(&params, &needed, config.max_extra);
    Ok(SimulationResult {
        mean_overhead_pct: stats.mean_overhead_pct,
        mean_extra_symbols: stats.mean_extra_symbols,
        failure_rates: stats.failure_rates,
        needed,
    })
}

#[pyclass(frozen, get_all)]
pub struct SimulationResult {
    mean_overhead_pct: f64,
    mean_extra_symbols: f64,
    /// `(e, fraction of trials needing more than k + e symbols)`
    failure_rates: Vec<(usize, f64)>,
    /// Symbols needed by each trial, in trial order.
    needed: Vec<usize>,
}

#[pymethods]
impl SimulationResult {
    fn __repr__(&self) -> String {
        format!(
            "SimulationResult(trials={}, mean_overhead_pct={:.4})",
            self.needed.len(),
            self.mean_overhead_pct
        )
    }
}

/// Symbols needed to decode when packets arrive in `order`.
#[pyfunction]
#[pyo3(signature = (r, m, order, algorithm = "full"))]
fn needed_symbols(r: u32, m: u32, order: Vec<usize>, algorithm: &str) -> PyResult<usize> {
    rmfec::needed_symbols(&params(r, m)?, self::algorithm(algorithm)?, &order).map_err(value_error)
}

#[pyfunction]
fn frame_packet(r: u32, m: u32, block_id: u32, slot: u16, payload: Vec<u8>) -> PyResult<Vec<u8>> {
    rmfec::frame_packet(&params(r, m)?, block_id, slot, &payload).map_err(value_error)
}

/// Parses one frame: `((r, m, block_id, slot, payload), bytes_consumed)`.
#[pyfunction]
#[allow(clippy::type_complexity)]
fn deframe_packet(buf: Vec<u8>) -> PyResult<((u8, u8, u32, u16, Vec<u8>), usize)> {
    let (f, used) = rmfec::deframe_packet(&buf).map_err(value_error)?;
    Ok(((f.r, f.m, f.block_id, f.slot, f.payload), used))
}

#[pymodule(name = "rmfec")]
fn rmfec_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DecodeError", m.py().get_type::<DecodeError>())?;
    m.add(
        "ALGORITHMS",
        Algorithm::ALL.iter().map(|a| a.name()).collect::<Vec<_>>(),
    )?;
    m.add_class::<PyCodeParams>()?;
    m.add_class::<PyCodec>()?;
    m.add_class::<PySchedule>()?;
    m.add_class::<SimulationResult>()?;
    m.add_function(wrap_pyfunction!(code_params, m)?)?;
    m.add_function(wrap_pyfunction!(encode_bits, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(needed_symbols, m)?)?;
    m.add_function(wrap_pyfunction!(frame_packet, m)?)?;
    m.add_function(wrap_pyfunction!(deframe_packet, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use pyo3::types::PyDict;

    fn run(code: &str) {
        Python::attach(|py| {
            let m = PyModule::new(py, "rmfec").unwrap();
            rmfec_module(&m).unwrap();
            let globals = PyDict::new(py);
            globals.set_item("rmfec", m).unwrap();
            let code = std::ffi::CString::new(code).unwrap();
            py.run(&code, Some(&globals), None).unwrap();
        });
    }

    #[test]
    fn params_and_encode() {
        run(r#"
p = rmfec.code_params(3, 7)
assert (p.k, p.n) == (64, 128), p
assert str(p) == "RM(3,7)"
assert rmfec.encode_bits([True, False, True], 1, 2) == [True, False, True, False]
c = rmfec.Codec(1, 2)
assert c.encode([b"\x01", b"\x02", b"\x04"]) == [b"\x01", b"\x02", b"\x04", b"\x07"]
"#);
    }

    #[test]
    fn decode_and_errors() {
        run(r#"
c = rmfec.Codec(1, 3)
src = [b"ab", b"cd", b"ef", b"gh"]
pkts = c.encode(src)
rx = [p if i in (0, 5, 6, 7) else None for i, p in enumerate(pkts)]
assert c.decode(rx, "full") == src
try:
    c.decode(rx, "classical")
    raise AssertionError("expected DecodeError")
except rmfec.DecodeError:
    pass
try:
    c.decode(rx, "nope")
    raise AssertionError("expected ValueError")
except ValueError:
    pass
s = c.schedule([p is not None for p in rx], "full")
assert s.success and s.replay(rx) == pkts
"#);
    }

    #[test]
    fn framing_and_simulation() {
        run(r#"
buf = rmfec.frame_packet(2, 4, 7, 3, b"xyz")
assert rmfec.deframe_packet(buf) == ((2, 4, 7, 3, b"xyz"), len(buf))
res = rmfec.simulate(2, 4, "ml", trials=50, seed=3, max_extra=4)
assert len(res.needed) == 50 and len(res.failure_rates) == 5
assert res.failure_rates[-1][1] <= res.failure_rates[0][1]
"#);
    }
}
