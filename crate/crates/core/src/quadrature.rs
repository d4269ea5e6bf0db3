//! Globally adaptive Gauss–Kronrod (G10/K21) quadrature.

use std::collections::BinaryHeap;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_600_525_421,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
    pub converged: bool,
}

/// Integration settings.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 0.0,
            max_intervals: 4000,
        }
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_sum = fc.abs() * WGK[10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kron += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kron * half;
    let mut error = ((kron - gauss) * half).abs();
    // QUADPACK-style error rescaling.
    let res_abs = abs_sum * half.abs();
    if error > 0.0 {
        let mean = kron * 0.5;
        let mut asc = WGK[10] * (fc - mean).abs();
        for j in 0..10 {
            let dx = half * XGK[j];
            asc += WGK[j] * ((f(center - dx) - mean).abs() + (f(center + dx) - mean).abs());
        }
        asc *= half.abs();
        if asc > 0.0 {
            error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
        }
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Segment { a, b, value, error }
}

impl Quadrature {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    /// ∫_a^b f.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> QuadResult {
        self.integrate_breaks(f, &[a, b])
    }

    /// Integral over `[breaks[0], breaks[last]]`, starting from the given partition.
    pub fn integrate_breaks<F: Fn(f64) -> f64>(&self, f: F, breaks: &[f64]) -> QuadResult {
        let mut heap: BinaryHeap<Segment> = breaks
            .windows(2)
            .filter(|w| w[1] != w[0])
            .map(|w| kronrod(&f, w[0], w[1]))
            .collect();
        if heap.is_empty() {
            return QuadResult {
                value: 0.0,
                error: 0.0,
                intervals: 0,
                converged: true,
            };
        }
        loop {
            let value: f64 = heap.iter().map(|s| s.value).sum();
            let error: f64 = heap.iter().map(|s| s.error).sum();
            let target = self.abs_tol.max(self.rel_tol * value.abs());
            if error <= target || heap.len() >= self.max_intervals {
                return QuadResult {
                    value,
                    error,
                    intervals: heap.len(),
                    converged: error <= target,
                };
            }
            let worst = heap.pop().expect("non-empty");
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
                // Interval can no longer be split in floating point.
                heap.push(Segment { error: 0.0, ..worst });
                continue;
            }
            heap.push(kronrod(&f, worst.a, mid));
            heap.push(kronrod(&f, mid, worst.b));
        }
    }
}

/// ∫_a^b f with default settings.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    Quadrature::default().integrate(f, a, b).value
}
