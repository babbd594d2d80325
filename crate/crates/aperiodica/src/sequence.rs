//! Conversions between marked symbol sequences and one-dimensional Delone
//! sets, plus word-complexity utilities.
//!
//! A finite word with a marked origin tiles an interval of the line: the
//! point set is `{0}`, the partial sums of interval lengths to the right,
//! and the negated partial sums to the left. Each point carries an exact
//! integer label counting the signed number of intervals of each symbol
//! between it and the origin, so positions and gaps are reproducible
//! without floating-point accumulation drift.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::Region;
use crate::patches::{patch_at, PatchKey};
use crate::pointset::PointSet;

/// A finite word over `char` symbols with a marked origin: `symbols[origin]`
/// is the interval immediately to the right of 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedWord {
    pub symbols: Vec<char>,
    pub origin: usize,
}

impl MarkedWord {
    pub fn new(symbols: Vec<char>, origin: usize) -> Self {
        MarkedWord { symbols, origin }
    }

    /// Parses `"ab|ab"` notation: the bar marks the origin.
    pub fn parse(s: &str) -> Result<Self> {
        let bar = s
            .find('|')
            .ok_or_else(|| Error::Parse("marked word needs a '|' origin marker".into()))?;
        let symbols: Vec<char> = s.chars().filter(|c| *c != '|').collect();
        if symbols.is_empty() {
            return Err(Error::EmptyWord);
        }
        if bar >= s.chars().count() {
            return Err(Error::Parse("origin marker must precede a symbol".into()));
        }
        Ok(MarkedWord { symbols, origin: bar })
    }

    /// Letter of index `n` relative to the origin, if inside the word.
    pub fn letter(&self, n: i64) -> Option<char> {
        let idx = self.origin as i64 + n;
        if idx < 0 {
            None
        } else {
            self.symbols.get(idx as usize).copied()
        }
    }
}

/// Tiling of the line by the word's intervals: `{0}`, rightward partial
/// sums and negated leftward partial sums. Labels count intervals per
/// symbol (alphabet in sorted order), so `position = label . lengths`.
pub fn seq_to_delone(word: &MarkedWord, lengths: &BTreeMap<char, f64>) -> Result<PointSet> {
    if word.symbols.is_empty() {
        return Err(Error::EmptyWord);
    }
    if word.origin > word.symbols.len() {
        return Err(Error::Parse("origin outside the word".into()));
    }
    for (&sym, &len) in lengths {
        if !(len > 0.0 && len.is_finite()) {
            return Err(Error::InvalidLength { symbol: sym, value: len });
        }
    }
    let alphabet: Vec<char> = lengths.keys().copied().collect();
    let slot: HashMap<char, usize> =
        alphabet.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let lens: Vec<f64> = alphabet.iter().map(|c| lengths[c]).collect();
    let index_of = |c: char| -> Result<usize> {
        slot.get(&c)
            .copied()
            .ok_or_else(|| Error::Parse(format!("no length for symbol '{c}'")))
    };

    let mut labels: Vec<Vec<i64>> = vec![vec![0; alphabet.len()]];
    let mut counts = vec![0i64; alphabet.len()];
    for &c in &word.symbols[word.origin..] {
        counts[index_of(c)?] += 1;
        labels.push(counts.clone());
    }
    counts = vec![0; alphabet.len()];
    for &c in word.symbols[..word.origin].iter().rev() {
        counts[index_of(c)?] -= 1;
        labels.push(counts.clone());
    }

    let position = |label: &[i64]| -> f64 {
        label.iter().zip(&lens).map(|(&n, &l)| n as f64 * l).sum()
    };
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by(|&a, &b| position(&labels[a]).partial_cmp(&position(&labels[b])).unwrap());
    let labels: Vec<Vec<i64>> = order.into_iter().map(|i| labels[i].clone()).collect();
    let points: Vec<Vec<f64>> = labels.iter().map(|l| vec![position(l)]).collect();
    let radius = points
        .iter()
        .map(|p| p[0].abs())
        .fold(0.0f64, f64::max);
    PointSet::new(
        1,
        points,
        Region::Ball { radius },
        Some(labels),
        format!("sequence tiling, {} letters", word.symbols.len()),
    )
}

/// Sequence of patch-equivalence classes read off a 1D Delone sample.
#[derive(Debug, Clone)]
pub struct SymbolSequence {
    /// Class id per consecutive interior point, left to right; ids are
    /// assigned in order of first appearance.
    pub classes: Vec<u32>,
    /// Index into `classes` of the point at the origin.
    pub origin: usize,
    /// Number of distinct classes (the alphabet size).
    pub class_count: usize,
    /// Right gap of each class representative (the smallest positive patch
    /// offset), indexed by class id.
    pub right_gaps: Vec<f64>,
}

impl SymbolSequence {
    /// Collapses classes onto their right-gap letter: classes whose
    /// representatives have the same right gap (within `tol`) become the
    /// same letter. This is the reduction that recovers the tiling word
    /// from the patch-class sequence.
    pub fn reduced_by_right_gap(&self, tol: f64) -> Vec<u32> {
        let mut reps: Vec<f64> = Vec::new();
        let letter_of: Vec<u32> = self
            .right_gaps
            .iter()
            .map(|&g| {
                match reps.iter().position(|&r| (r - g).abs() <= tol) {
                    Some(i) => i as u32,
                    None => {
                        reps.push(g);
                        (reps.len() - 1) as u32
                    }
                }
            })
            .collect();
        self.classes.iter().map(|&c| letter_of[c as usize]).collect()
    }
}

/// Converts a 1D Delone sample containing the origin into the sequence of
/// patch classes `(Lambda - x_n) ∩ B_{r_class}`, enumerated in increasing
/// point order over all interior centers. The classical choice is
/// `r_class = 2R` (twice the covering radius); smaller radii are accepted
/// and simply yield coarser alphabets.
pub fn delone_to_seq(p: &PointSet, r_class: f64) -> Result<SymbolSequence> {
    if p.dim() != 1 {
        return Err(Error::InvalidPointSet(format!(
            "delone_to_seq needs dimension 1, got {}",
            p.dim()
        )));
    }
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| p.points()[a][0].partial_cmp(&p.points()[b][0]).unwrap());
    let origin_pos = order
        .iter()
        .position(|&i| p.points()[i][0] == 0.0)
        .ok_or(Error::OriginRequired)?;

    let interior: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| p.region().boundary_distance(&p.points()[i]) >= r_class)
        .collect();
    if interior.is_empty() {
        return Err(Error::RegionTooSmall(
            "no interior centers at the requested class radius".into(),
        ));
    }
    let origin = interior
        .iter()
        .position(|&i| order[origin_pos] == i)
        .ok_or_else(|| {
            Error::RegionTooSmall("origin patch does not fit inside the region".into())
        })?;

    let mut ids: HashMap<PatchKey, u32> = HashMap::new();
    let mut classes = Vec::with_capacity(interior.len());
    let mut right_gaps = Vec::new();
    for &i in &interior {
        let patch = patch_at(p, i, r_class)?;
        let next = ids.len() as u32;
        let id = *ids.entry(patch.key.clone()).or_insert(next);
        if id == next {
            let right = patch
                .offsets
                .iter()
                .map(|o| o[0])
                .filter(|&x| x > 0.0)
                .fold(f64::INFINITY, f64::min);
            right_gaps.push(right);
        }
        classes.push(id);
    }
    Ok(SymbolSequence {
        classes,
        origin,
        class_count: ids.len(),
        right_gaps,
    })
}

/// Number of distinct factors of length `n` in `word`.
pub fn factor_complexity<T: Eq + std::hash::Hash>(word: &[T], n: usize) -> usize {
    if n == 0 || n > word.len() {
        return usize::from(n == 0);
    }
    let mut seen = HashSet::new();
    for w in word.windows(n) {
        seen.insert(w);
    }
    seen.len()
}

/// Prefix of the Fibonacci substitution fixed point (`a -> ab`, `b -> a`)
/// of at least `min_len` letters.
pub fn fibonacci_word(min_len: usize) -> Vec<char> {
    let mut word = vec!['a'];
    while word.len() < min_len {
        let mut next = Vec::with_capacity(word.len() * 2);
        for &c in &word {
            match c {
                'a' => next.extend(['a', 'b']),
                _ => next.push('a'),
            }
        }
        word = next;
    }
    word
}

/// Seeded Bernoulli word over `{a, b}` with `P(a) = p_a`, origin at the
/// middle.
pub fn random_word(len: usize, seed: u64, p_a: f64) -> MarkedWord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let symbols: Vec<char> = (0..len)
        .map(|_| if rng.gen::<f64>() < p_a { 'a' } else { 'b' })
        .collect();
    MarkedWord { symbols, origin: len / 2 }
}
