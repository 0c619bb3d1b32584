//! Matrix-free `exp(−iΔt H(s))` by Chebyshev expansion on the sparse ramp generator.
//!
//! With `H = a H̃ + b` and the spectrum of `H̃` inside `[−1, 1]`,
//! `exp(−iΔtH) = e^{−iΔtb} [J_0(x) + 2 Σ_{k≥1} (−i)^k J_k(x) T_k(H̃)]` for `x = aΔt`.
//! Blocks of columns are transposed into row-major scratch so every sparse row
//! update is a contiguous axpy.

use faer::c64;
use rayon::prelude::*;

use crate::model::RampGenerator;

/// Terms whose Bessel weight falls below this are dropped.
const TRUNCATION_TOL: f64 = 1e-17;

/// Columns processed together in one cache-resident block.
pub(crate) const BLOCK_WIDTH: usize = 16;

/// Bessel functions `J_0(x) … J_{n}(x)` of the first kind for `x ≥ 0`, by
/// Miller's backward recurrence normalized with `J_0 + 2 Σ J_{2k} = 1`.
pub fn bessel_j_sequence(x: f64, n: usize) -> Vec<f64> {
    assert!(x >= 0.0 && x.is_finite(), "bessel argument must be finite and non-negative");
    let mut out = vec![0.0; n + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let start = {
        let m = n.max(x.ceil() as usize) + 20 + (40.0 * x).sqrt() as usize;
        m + (m % 2)
    };
    // unnormalized J_{m+1} and J_m, starting from J_{start+1} = 0
    let mut next = 0.0;
    let mut cur = 1e-300;
    let mut norm = 2.0 * cur;
    for m in (1..=start).rev() {
        let lower = (2.0 * m as f64 / x) * cur - next;
        next = cur;
        cur = lower;
        let k = m - 1;
        if k <= n {
            out[k] = cur;
        }
        if k % 2 == 0 && k > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    norm += cur;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

/// Expansion coefficients `e^{−iΔtb} c_k` for one step, truncated at negligible weight.
fn coefficients(x: f64, phase: c64) -> Vec<c64> {
    let n = (x.ceil() as usize) * 2 + 40;
    let j = bessel_j_sequence(x, n);
    let last = j
        .iter()
        .rposition(|v| v.abs() > TRUNCATION_TOL)
        .unwrap_or(0)
        .max(1);
    let minus_i = c64::new(0.0, -1.0);
    let mut pow = c64::new(1.0, 0.0);
    (0..=last)
        .map(|k| {
            let c = if k == 0 { j[0] } else { 2.0 * j[k] };
            let out = phase * pow * c;
            pow *= minus_i;
            out
        })
        .collect()
}

/// `H̃ = α M + diag(β)` with `M` the sparse mixer.
struct Scaled<'a> {
    gen: &'a RampGenerator,
    alpha: f64,
    beta: Vec<f64>,
}

impl Scaled<'_> {
    /// Row-major `dst = 2 H̃ src − dst` (or `H̃ src` on the first pass) for rows of
    /// `W` interleaved complex entries, then `acc += c · dst`.
    #[inline(always)]
    #[allow(clippy::too_many_arguments)]
    fn recurrence_row<const W: usize, const FMA: bool>(
        &self,
        r: usize,
        src: &[[f64; 2]],
        dst: &mut [[f64; 2]],
        acc: &mut [[f64; 2]],
        c: c64,
        first: bool,
    ) {
        let madd = |a: f64, b: f64, acc: f64| if FMA { a.mul_add(b, acc) } else { a * b + acc };
        let own: &[[f64; 2]; W] = src[r * W..(r + 1) * W].try_into().unwrap();
        let b = self.beta[r];
        let mut tmp = [[0.0f64; 2]; W];
        for (t, o) in tmp.iter_mut().zip(own) {
            t[0] = b * o[0];
            t[1] = b * o[1];
        }
        for (col, v) in self.gen.mixer().row(r) {
            let h = self.alpha * v;
            let x: &[[f64; 2]; W] = src[col * W..(col + 1) * W].try_into().unwrap();
            for (t, xv) in tmp.iter_mut().zip(x) {
                t[0] = madd(h, xv[0], t[0]);
                t[1] = madd(h, xv[1], t[1]);
            }
        }
        let dst: &mut [[f64; 2]; W] = (&mut dst[r * W..(r + 1) * W]).try_into().unwrap();
        if first {
            *dst = tmp;
        } else {
            for (d, t) in dst.iter_mut().zip(&tmp) {
                d[0] = madd(2.0, t[0], -d[0]);
                d[1] = madd(2.0, t[1], -d[1]);
            }
        }
        let acc: &mut [[f64; 2]; W] = (&mut acc[r * W..(r + 1) * W]).try_into().unwrap();
        for (a, d) in acc.iter_mut().zip(dst.iter()) {
            a[0] = madd(c.re, d[0], madd(-c.im, d[1], a[0]));
            a[1] = madd(c.re, d[1], madd(c.im, d[0], a[1]));
        }
    }
}

/// Exponential step `exp(−iΔt H(s))` applied in place to column-major blocks.
pub(crate) struct ChebyshevStep<'a> {
    op: Scaled<'a>,
    coeffs: Vec<c64>,
}

impl<'a> ChebyshevStep<'a> {
    pub(crate) fn new(gen: &'a RampGenerator, s: f64, dt: f64) -> Self {
        let (lo, hi) = gen.spectral_bounds(s);
        let half_width = ((hi - lo) / 2.0).max(1e-12);
        let center = (hi + lo) / 2.0;
        let alpha = (1.0 - s) / half_width;
        let beta = gen
            .problem_diagonal()
            .iter()
            .map(|d| (s * d - center) / half_width)
            .collect();
        let phase = c64::from_polar(1.0, -dt * center);
        Self {
            op: Scaled { gen, alpha, beta },
            coeffs: coefficients(half_width * dt, phase),
        }
    }

    pub(crate) fn n_terms(&self) -> usize {
        self.coeffs.len()
    }

    /// Applies the step to every column of the column-major `d × ncols` array.
    pub(crate) fn apply(&self, data: &mut [c64]) {
        let d = self.op.gen.dim();
        assert_eq!(data.len() % d, 0);
        data.par_chunks_mut(d * BLOCK_WIDTH).for_each(|chunk| match (chunk.len() / d).next_power_of_two() {
            1 => self.apply_chunk::<1>(chunk, d),
            2 => self.apply_chunk::<2>(chunk, d),
            4 => self.apply_chunk::<4>(chunk, d),
            8 => self.apply_chunk::<8>(chunk, d),
            _ => self.apply_chunk::<BLOCK_WIDTH>(chunk, d),
        });
    }

    fn apply_chunk<const W: usize>(&self, chunk: &mut [c64], d: usize) {
        let mut s = BlockScratch::<W>::load(chunk, d);
        #[cfg(target_arch = "x86_64")]
        {
            if std::arch::is_x86_feature_detected!("avx512f") {
                // SAFETY: the required CPU feature was detected at runtime.
                unsafe { self.run_avx512(&mut s, d) };
                s.store(chunk, d);
                return;
            }
            if std::arch::is_x86_feature_detected!("avx2") && std::arch::is_x86_feature_detected!("fma") {
                // SAFETY: as above.
                unsafe { self.run_avx2(&mut s, d) };
                s.store(chunk, d);
                return;
            }
        }
        self.run::<W, false>(&mut s, d);
        s.store(chunk, d);
    }

    #[cfg(target_arch = "x86_64")]
    #[target_feature(enable = "avx512f,fma")]
    unsafe fn run_avx512<const W: usize>(&self, s: &mut BlockScratch<W>, d: usize) {
        self.run::<W, true>(s, d)
    }

    #[cfg(target_arch = "x86_64")]
    #[target_feature(enable = "avx2,fma")]
    unsafe fn run_avx2<const W: usize>(&self, s: &mut BlockScratch<W>, d: usize) {
        self.run::<W, true>(s, d)
    }

    #[inline(always)]
    fn run<const W: usize, const FMA: bool>(&self, s: &mut BlockScratch<W>, d: usize) {
        let c0 = self.coeffs[0];
        for (a, x) in s.acc.iter_mut().zip(&s.prev) {
            a[0] = c0.re * x[0] - c0.im * x[1];
            a[1] = c0.re * x[1] + c0.im * x[0];
        }
        if self.coeffs.len() < 2 {
            return;
        }
        for r in 0..d {
            self.op
                .recurrence_row::<W, FMA>(r, &s.prev, &mut s.cur, &mut s.acc, self.coeffs[1], true);
        }
        for &c in &self.coeffs[2..] {
            // prev ← 2 H̃ cur − prev, then swap roles
            for r in 0..d {
                self.op.recurrence_row::<W, FMA>(r, &s.cur, &mut s.prev, &mut s.acc, c, false);
            }
            std::mem::swap(&mut s.prev, &mut s.cur);
        }
    }
}

/// Row-major working copies of up to `W` columns; unused columns stay zero.
struct BlockScratch<const W: usize> {
    width: usize,
    prev: Vec<[f64; 2]>,
    cur: Vec<[f64; 2]>,
    acc: Vec<[f64; 2]>,
}

impl<const W: usize> BlockScratch<W> {
    fn load(chunk: &[c64], d: usize) -> Self {
        let width = chunk.len() / d;
        let mut prev = vec![[0.0; 2]; d * W];
        for j in 0..width {
            for r in 0..d {
                let z = chunk[j * d + r];
                prev[r * W + j] = [z.re, z.im];
            }
        }
        Self {
            width,
            prev,
            cur: vec![[0.0; 2]; d * W],
            acc: vec![[0.0; 2]; d * W],
        }
    }

    fn store(&self, chunk: &mut [c64], d: usize) {
        for j in 0..self.width {
            for r in 0..d {
                let [re, im] = self.acc[r * W + j];
                chunk[j * d + r] = c64::new(re, im);
            }
        }
    }
}
