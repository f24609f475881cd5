use super::{check_received, to_blocks};
use crate::channel::{ChannelModel, Symbol};
use crate::treecode::{BitBlock, LtiCode};
use crate::{Error, Result};

/// Largest `k·t` searched exhaustively.
pub const ML_MAX_BITS: usize = 24;

/// Exhaustive maximum-likelihood decoding over all `2^{kt}` message
/// sequences. Ties go to the lexicographically first sequence. Test oracle
/// only.
pub fn ml_decode_bruteforce(
    code: &LtiCode,
    ch: &ChannelModel,
    received: &[Vec<Symbol>],
) -> Result<Vec<BitBlock>> {
    let t = received.len();
    let bits = code.k() * t;
    if bits > ML_MAX_BITS {
        return Err(Error::InstanceTooLarge(bits));
    }
    if t > code.horizon() {
        return Err(Error::HorizonExceeded { depth: t, horizon: code.horizon() });
    }
    for z in received {
        check_received(code, ch, z)?;
    }
    let loglik: Vec<Vec<[f64; 2]>> = received
        .iter()
        .map(|z| z.iter().map(|&s| [ch.w(s, false).log2(), ch.w(s, true).log2()]).collect())
        .collect();

    let mut search = Search {
        code,
        loglik: &loglik,
        path: Vec::with_capacity(t),
        best: None,
    };
    search.descend(0.0);
    let (words, _) = search.best.expect("at least one sequence is searched");
    Ok(to_blocks(words, code.k()))
}

struct Search<'a> {
    code: &'a LtiCode,
    loglik: &'a [Vec<[f64; 2]>],
    path: Vec<u64>,
    best: Option<(Vec<u64>, f64)>,
}

impl Search<'_> {
    fn descend(&mut self, score: f64) {
        let depth = self.path.len();
        if depth == self.loglik.len() {
            if self.best.as_ref().is_none_or(|(_, s)| score > *s) {
                self.best = Some((self.path.clone(), score));
            }
            return;
        }
        let partial = self.code.partial_newest_first(depth + 1, self.path.iter().rev().copied());
        for b in 0..1u64 << self.code.k() {
            let word = partial ^ self.code.mul(1, b);
            let branch: f64 = self.loglik[depth]
                .iter()
                .enumerate()
                .map(|(j, ll)| ll[((word >> j) & 1) as usize])
                .sum();
            self.path.push(b);
            self.descend(score + branch);
            self.path.pop();
        }
    }
}
