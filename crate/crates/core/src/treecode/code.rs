use rand::Rng;

use super::bits::{mask, BitBlock, GeneratorBlock, MAX_BLOCK_BITS};
use crate::{Error, Result};

/// Largest product table (entries) built at construction time.
const TABLE_LIMIT: usize = 1 << 24;
const TABLE_MAX_K: usize = 10;

/// A finite-horizon LTI tree code with generator blocks `G_1..G_T`.
#[derive(Clone, Debug)]
pub struct LtiCode {
    n: usize,
    k: usize,
    blocks: Vec<GeneratorBlock>,
    translation: Option<Vec<u64>>,
    // table[(lag - 1) << k | b] = G_lag b
    table: Option<Vec<u64>>,
}

impl PartialEq for LtiCode {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.k == other.k
            && self.blocks == other.blocks
            && self.translation == other.translation
    }
}

impl Eq for LtiCode {}

/// Draws a code from the LTI ensemble: `G_1` uniform over full-rank
/// `n × k` matrices (by rejection), later blocks and the optional
/// translation i.i.d. uniform.
pub fn sample_lti<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    horizon: usize,
    affine: bool,
    rng: &mut R,
) -> Result<LtiCode> {
    check_dims(n, k, horizon)?;
    let g1 = loop {
        let g = GeneratorBlock::random(n, k, rng);
        if g.rank() == k {
            break g;
        }
    };
    let mut blocks = Vec::with_capacity(horizon);
    blocks.push(g1);
    blocks.extend((1..horizon).map(|_| GeneratorBlock::random(n, k, rng)));
    let translation =
        affine.then(|| (0..horizon).map(|_| rng.random::<u64>() & mask(n)).collect());
    LtiCode::from_parts(n, k, blocks, translation)
}

fn check_dims(n: usize, k: usize, horizon: usize) -> Result<()> {
    if k == 0 || k >= n || n > MAX_BLOCK_BITS {
        return Err(Error::invalid(format!("need 1 <= k < n <= 64, got n={n} k={k}")));
    }
    if horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    Ok(())
}

impl LtiCode {
    pub fn from_parts(
        n: usize,
        k: usize,
        blocks: Vec<GeneratorBlock>,
        translation: Option<Vec<u64>>,
    ) -> Result<Self> {
        check_dims(n, k, blocks.len())?;
        for g in &blocks {
            if g.rows_count() != n || g.cols_count() != k {
                return Err(Error::invalid(format!(
                    "generator block is {}x{}, expected {n}x{k}",
                    g.rows_count(),
                    g.cols_count()
                )));
            }
        }
        if blocks[0].rank() != k {
            return Err(Error::invalid("G_1 does not have full column rank"));
        }
        if let Some(v) = &translation {
            if v.len() != blocks.len() {
                return Err(Error::DimensionMismatch { expected: blocks.len(), actual: v.len() });
            }
            if v.iter().any(|w| w & !mask(n) != 0) {
                return Err(Error::invalid("translation word wider than n"));
            }
        }
        let entries = blocks.len() << k;
        let table = (k <= TABLE_MAX_K && entries <= TABLE_LIMIT).then(|| {
            let mut t = Vec::with_capacity(entries);
            for g in &blocks {
                t.extend((0..1u64 << k).map(|b| g.mul_word(b)));
            }
            t
        });
        Ok(Self { n, k, blocks, translation, table })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn horizon(&self) -> usize {
        self.blocks.len()
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn is_affine(&self) -> bool {
        self.translation.is_some()
    }

    /// `G_lag` for `lag` in `1..=horizon`.
    pub fn block(&self, lag: usize) -> &GeneratorBlock {
        &self.blocks[lag - 1]
    }

    pub fn blocks(&self) -> &[GeneratorBlock] {
        &self.blocks
    }

    pub fn translation(&self) -> Option<&[u64]> {
        self.translation.as_deref()
    }

    /// `v_t` for depth `t ≥ 1`, zero for linear codes.
    #[inline]
    pub fn translation_word(&self, t: usize) -> u64 {
        self.translation.as_ref().map_or(0, |v| v[t - 1])
    }

    /// `G_lag b` on packed words.
    #[inline]
    pub fn mul(&self, lag: usize, b: u64) -> u64 {
        match &self.table {
            Some(t) => t[((lag - 1) << self.k) | b as usize],
            None => self.blocks[lag - 1].mul_word(b),
        }
    }

    /// Contribution of a prefix `b_1..b_t` to code block `t+1`, including
    /// `v_{t+1}`. The prefix is supplied newest block first.
    #[inline]
    pub(crate) fn partial_newest_first(
        &self,
        next_depth: usize,
        newest_first: impl Iterator<Item = u64>,
    ) -> u64 {
        let mut acc = self.translation_word(next_depth);
        for (i, b) in newest_first.enumerate() {
            acc ^= self.mul(i + 2, b);
        }
        acc
    }

    fn check_message(&self, b: &BitBlock) -> Result<()> {
        if b.len() != self.k {
            return Err(Error::DimensionMismatch { expected: self.k, actual: b.len() });
        }
        Ok(())
    }

    /// Absorbs `b_t` and emits `c_t = Σ_{i≤t} G_{t−i+1} b_i (+ v_t)`.
    pub fn encode_step(&self, state: &mut EncoderState, b: &BitBlock) -> Result<BitBlock> {
        self.check_message(b)?;
        let t = state.history.len() + 1;
        if t > self.horizon() {
            return Err(Error::HorizonExceeded { depth: t, horizon: self.horizon() });
        }
        let partial = self.partial_newest_first(t, state.history.iter().rev().copied());
        state.history.push(b.bits());
        Ok(BitBlock::from_raw(partial ^ self.mul(1, b.bits()), self.n))
    }

    pub fn encode_prefix(&self, msgs: &[BitBlock]) -> Result<Vec<BitBlock>> {
        let mut state = EncoderState::new();
        msgs.iter().map(|b| self.encode_step(&mut state, b)).collect()
    }

    /// Cache for extending the prefix `b_1..b_t` by one block.
    pub fn branch_cache(&self, prefix: &[BitBlock]) -> Result<BranchCache> {
        let depth = prefix.len();
        if depth + 1 > self.horizon() {
            return Err(Error::HorizonExceeded { depth: depth + 1, horizon: self.horizon() });
        }
        for b in prefix {
            self.check_message(b)?;
        }
        let partial = self.partial_newest_first(depth + 1, prefix.iter().rev().map(|b| b.bits()));
        Ok(BranchCache { depth, partial })
    }

    /// Code block for candidate `b_{t+1}` on the cached prefix; `O(n·k)`.
    pub fn branch_extend(&self, cache: &BranchCache, b: &BitBlock) -> Result<BitBlock> {
        self.check_message(b)?;
        if cache.depth + 1 > self.horizon() {
            return Err(Error::HorizonExceeded { depth: cache.depth + 1, horizon: self.horizon() });
        }
        Ok(BitBlock::from_raw(cache.partial ^ self.mul(1, b.bits()), self.n))
    }
}

/// Message history absorbed so far by a causal encoder.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EncoderState {
    history: Vec<u64>,
}

impl EncoderState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn depth(&self) -> usize {
        self.history.len()
    }
}

/// Running contribution of an explored prefix of depth `depth` to the next
/// code block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BranchCache {
    pub depth: usize,
    pub partial: u64,
}

impl BranchCache {
    pub fn root(code: &LtiCode) -> Self {
        Self { depth: 0, partial: code.translation_word(1) }
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `(n', k', g)` with `g = gcd(n, k)`, `n = n'g`, `k = k'g`.
pub fn subblock_expand(n: usize, k: usize) -> Result<(usize, usize, usize)> {
    if n == 0 || k == 0 {
        return Err(Error::invalid("block dimensions must be positive"));
    }
    let g = gcd(n, k);
    Ok((n / g, k / g, g))
}

/// Splits a `group·width`-bit word into `group` sub-blocks, lowest bits first.
pub fn split_subblocks(word: u64, width: usize, group: usize) -> impl Iterator<Item = u64> {
    (0..group).map(move |i| (word >> (i * width)) & mask(width))
}

/// Inverse of [`split_subblocks`].
pub fn join_subblocks(parts: impl IntoIterator<Item = u64>, width: usize) -> u64 {
    parts
        .into_iter()
        .enumerate()
        .fold(0u64, |w, (i, p)| w | (p << (i * width)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn blk(bits: u64, len: usize) -> BitBlock {
        BitBlock::new(bits, len).unwrap()
    }

    fn hand_code() -> LtiCode {
        // G_1 = (1,1)^T, G_2 = (0,1)^T; bit 0 is the first coordinate
        let g1 = GeneratorBlock::from_columns(2, vec![0b11]).unwrap();
        let g2 = GeneratorBlock::from_columns(2, vec![0b10]).unwrap();
        LtiCode::from_parts(2, 1, vec![g1, g2], None).unwrap()
    }

    #[test]
    fn hand_convolution() {
        let code = hand_code();
        let c = code.encode_prefix(&[blk(1, 1), blk(1, 1)]).unwrap();
        assert_eq!(c[0], blk(0b11, 2));
        // G_2·1 + G_1·1 = (0,1) + (1,1) = (1,0)
        assert_eq!(c[1], blk(0b01, 2));
    }

    #[test]
    fn horizon_overflow() {
        let code = hand_code();
        let mut st = EncoderState::new();
        for _ in 0..2 {
            code.encode_step(&mut st, &blk(0, 1)).unwrap();
        }
        assert!(matches!(
            code.encode_step(&mut st, &blk(0, 1)),
            Err(Error::HorizonExceeded { depth: 3, horizon: 2 })
        ));
        assert_eq!(st.depth(), 2);
    }

    #[test]
    fn rejects_bad_dimensions() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_lti(4, 4, 3, false, &mut rng).is_err());
        assert!(sample_lti(4, 0, 3, false, &mut rng).is_err());
        assert!(sample_lti(4, 1, 0, false, &mut rng).is_err());
        assert!(sample_lti(65, 1, 3, false, &mut rng).is_err());
        let singular = GeneratorBlock::zeros(3, 1);
        assert!(LtiCode::from_parts(3, 1, vec![singular], None).is_err());
    }

    #[test]
    fn control_code_dimensions_sample() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let c = sample_lti(20, 10, 200, false, &mut rng).unwrap();
        assert_eq!(c.rate(), 0.5);
        assert_eq!(c.horizon(), 200);
        assert_eq!(c.block(1).rank(), 10);
        let c = sample_lti(20, 4, 200, true, &mut rng).unwrap();
        assert_eq!(c.rate(), 0.2);
        assert!(c.is_affine());
        let c = sample_lti(2, 1, 5, false, &mut rng).unwrap();
        assert_ne!(c.block(1).columns()[0], 0);
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let a = sample_lti(8, 3, 30, true, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = sample_lti(8, 3, 30, true, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn affine_zero_message_emits_translation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let code = sample_lti(6, 2, 10, true, &mut rng).unwrap();
        let c = code.encode_prefix(&vec![blk(0, 2); 10]).unwrap();
        for (t, ct) in c.iter().enumerate() {
            assert_eq!(ct.bits(), code.translation_word(t + 1));
        }
        let lin = sample_lti(6, 2, 10, false, &mut rng).unwrap();
        assert!(lin.encode_prefix(&vec![blk(0, 2); 10]).unwrap().iter().all(|c| c.bits() == 0));
    }

    #[test]
    fn branch_extend_matches_encoder() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for trial in 0..1000 {
            let affine = trial % 2 == 0;
            let code = sample_lti(7, 3, 12, affine, &mut rng).unwrap();
            let t = rng.random_range(0..12);
            let prefix: Vec<BitBlock> =
                (0..t).map(|_| blk(rng.random::<u64>() & 0b111, 3)).collect();
            let cand = blk(rng.random::<u64>() & 0b111, 3);
            let mut full = prefix.clone();
            full.push(cand);
            let expect = *code.encode_prefix(&full).unwrap().last().unwrap();
            let cache = code.branch_cache(&prefix).unwrap();
            assert_eq!(code.branch_extend(&cache, &cand).unwrap(), expect);
        }
    }

    #[test]
    fn branch_extend_linearity_in_candidate() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let code = sample_lti(10, 4, 8, true, &mut rng).unwrap();
        let prefix = vec![blk(0b1010, 4), blk(0b0111, 4)];
        let cache = code.branch_cache(&prefix).unwrap();
        for j in 0..4 {
            let a = code.branch_extend(&cache, &blk(0b0101, 4)).unwrap();
            let b = code.branch_extend(&cache, &blk(0b0101 ^ (1 << j), 4)).unwrap();
            assert_eq!(a.bits() ^ b.bits(), code.block(1).columns()[j]);
        }
        let root = BranchCache::root(&code);
        assert_eq!(
            code.branch_extend(&root, &blk(0, 4)).unwrap().bits(),
            code.translation_word(1)
        );
    }

    #[test]
    fn branch_cache_rejects_full_prefix() {
        let code = hand_code();
        assert!(code.branch_cache(&[blk(0, 1), blk(1, 1)]).is_err());
        let bad = BranchCache { depth: 2, partial: 0 };
        assert!(code.branch_extend(&bad, &blk(0, 1)).is_err());
    }

    #[test]
    fn subblock_dimensions() {
        assert_eq!(subblock_expand(20, 10).unwrap(), (2, 1, 10));
        assert_eq!(subblock_expand(20, 4).unwrap(), (5, 1, 4));
        assert_eq!(subblock_expand(3, 2).unwrap(), (3, 2, 1));
        assert!(subblock_expand(0, 2).is_err());
    }

    #[test]
    fn subblock_split_join() {
        let w = 0b011_101_110_101u64;
        let parts: Vec<u64> = split_subblocks(w, 3, 4).collect();
        assert_eq!(parts, vec![0b101, 0b110, 0b101, 0b011]);
        assert_eq!(join_subblocks(parts, 3), w);
    }
}
