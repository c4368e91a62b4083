//! Symbolic itineraries: cyclic words over obstacle labels.
//!
//! A periodic orbit is coded by the cyclic sequence of obstacles it visits.
//! Consecutive letters differ (cyclically), and two words code the same
//! orbit iff one is a rotation of the other. Orbits are oriented, so a word
//! and its reversal are distinct classes.

use std::fmt;
use std::str::FromStr;

pub type Letter = u8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SymbolicError {
    #[error("empty word")]
    Empty,
    #[error("letters {0} and {1} at positions {2} and {3} repeat (cyclically)")]
    Adjacent(Letter, Letter, usize, usize),
    #[error("word {0} is not primitive")]
    NotPrimitive(String),
    #[error("word must not start or end with 0: {0}")]
    BoundaryZero(String),
    #[error("word must be zero-free: {0}")]
    ContainsZero(String),
    #[error("cannot parse word {0:?}")]
    Parse(String),
}

/// Contiguous range of letters `first..=last`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alphabet {
    pub first: Letter,
    pub last: Letter,
}

impl Alphabet {
    pub fn new(first: Letter, last: Letter) -> Self {
        assert!(first <= last, "empty alphabet");
        Self { first, last }
    }

    pub fn size(&self) -> usize {
        (self.last - self.first) as usize + 1
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        self.first..=self.last
    }
}

/// Canonical (least-rotation) representative of a cyclic word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CyclicWord {
    letters: Vec<Letter>,
    primitive: bool,
    zeros: usize,
}

impl CyclicWord {
    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_primitive(&self) -> bool {
        self.primitive
    }

    pub fn zeros(&self) -> usize {
        self.zeros
    }

    /// Always true: values are only built through [`canonicalize`].
    pub fn is_canonical(&self) -> bool {
        true
    }

    /// Smallest `p` with `rotate(w, p) = w`.
    pub fn period(&self) -> usize {
        cyclic_period(&self.letters)
    }

    /// Sort key used everywhere output order matters: length, then letters.
    pub fn sort_key(&self) -> (usize, &[Letter]) {
        (self.letters.len(), &self.letters)
    }
}

impl fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_letters(&self.letters))
    }
}

impl FromStr for CyclicWord {
    type Err = SymbolicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        canonicalize(&parse_letters(s)?)
    }
}

pub fn format_letters(letters: &[Letter]) -> String {
    letters
        .iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

pub fn parse_letters(s: &str) -> Result<Vec<Letter>, SymbolicError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(SymbolicError::Empty);
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<Letter>()
                .map_err(|_| SymbolicError::Parse(s.to_string()))
        })
        .collect()
}

/// Fails unless consecutive letters differ, including last → first.
pub fn check_cyclic_adjacency(letters: &[Letter]) -> Result<(), SymbolicError> {
    let n = letters.len();
    if n == 0 {
        return Err(SymbolicError::Empty);
    }
    for i in 0..n {
        let j = (i + 1) % n;
        if letters[i] == letters[j] {
            return Err(SymbolicError::Adjacent(letters[i], letters[j], i, j));
        }
    }
    Ok(())
}

/// Start index of the lexicographically least rotation, via the Lyndon
/// factorization of the doubled word (Duval, O(N)).
pub fn least_rotation(s: &[Letter]) -> usize {
    let n = s.len();
    let at = |i: usize| s[i % n];
    let mut i = 0;
    let mut ans = 0;
    while i < n {
        ans = i;
        let mut j = i + 1;
        let mut k = i;
        while j < 2 * n && at(k) <= at(j) {
            if at(k) < at(j) {
                k = i;
            } else {
                k += 1;
            }
            j += 1;
        }
        while i <= k {
            i += j - k;
        }
    }
    ans
}

pub fn rotate(letters: &[Letter], by: usize) -> Vec<Letter> {
    let n = letters.len();
    (0..n).map(|i| letters[(i + by) % n]).collect()
}

/// Smallest cyclic period, via the prefix function.
pub fn cyclic_period(letters: &[Letter]) -> usize {
    let n = letters.len();
    if n == 0 {
        return 0;
    }
    let mut pi = vec![0usize; n];
    for i in 1..n {
        let mut k = pi[i - 1];
        while k > 0 && letters[i] != letters[k] {
            k = pi[k - 1];
        }
        if letters[i] == letters[k] {
            k += 1;
        }
        pi[i] = k;
    }
    let p = n - pi[n - 1];
    if n % p == 0 {
        p
    } else {
        n
    }
}

pub fn canonicalize(letters: &[Letter]) -> Result<CyclicWord, SymbolicError> {
    check_cyclic_adjacency(letters)?;
    let start = least_rotation(letters);
    let letters = rotate(letters, start);
    let primitive = cyclic_period(&letters) == letters.len();
    let zeros = letters.iter().filter(|&&l| l == 0).count();
    Ok(CyclicWord {
        letters,
        primitive,
        zeros,
    })
}

/// Zero-count constraint on enumerated words.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroFilter {
    #[default]
    Any,
    Exactly(usize),
    AtMost(usize),
}

impl ZeroFilter {
    pub fn admits(&self, zeros: usize) -> bool {
        match *self {
            ZeroFilter::Any => true,
            ZeroFilter::Exactly(n) => zeros == n,
            ZeroFilter::AtMost(n) => zeros <= n,
        }
    }

    fn cap(&self) -> usize {
        match *self {
            ZeroFilter::Any => usize::MAX,
            ZeroFilter::Exactly(n) | ZeroFilter::AtMost(n) => n,
        }
    }
}

impl fmt::Display for ZeroFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZeroFilter::Any => write!(f, "any"),
            ZeroFilter::Exactly(n) => write!(f, "exactly:{n}"),
            ZeroFilter::AtMost(n) => write!(f, "at_most:{n}"),
        }
    }
}

impl FromStr for ZeroFilter {
    type Err = SymbolicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SymbolicError::Parse(s.to_string());
        match s.split_once(':') {
            None if s == "any" => Ok(ZeroFilter::Any),
            Some(("exactly", n)) => Ok(ZeroFilter::Exactly(n.parse().map_err(|_| bad())?)),
            Some(("at_most", n)) => Ok(ZeroFilter::AtMost(n.parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }
}

/// Canonical cyclic words of exactly `length` letters, in lexicographic order.
///
/// Necklaces are generated with the Fredricksen–Kessler–Maiorana recursion,
/// pruned as soon as a prefix repeats a letter or exceeds the zero budget.
pub fn enumerate_words(
    alphabet: Alphabet,
    length: usize,
    zeros: ZeroFilter,
    primitive_only: bool,
) -> std::vec::IntoIter<CyclicWord> {
    let mut out = Vec::new();
    if length >= 2 && alphabet.size() >= 2 {
        let mut gen = Necklaces {
            n: length,
            k: alphabet.size() as Letter,
            offset: alphabet.first,
            zero_index: if alphabet.first == 0 { Some(0) } else { None },
            filter: zeros,
            primitive_only,
            a: vec![0; length + 1],
            out: &mut out,
        };
        gen.run(1, 1, 0);
    }
    out.into_iter()
}

struct Necklaces<'a> {
    n: usize,
    k: Letter,
    offset: Letter,
    zero_index: Option<Letter>,
    filter: ZeroFilter,
    primitive_only: bool,
    a: Vec<Letter>,
    out: &'a mut Vec<CyclicWord>,
}

impl Necklaces<'_> {
    fn admissible(&self, t: usize, zeros: usize) -> bool {
        if zeros > self.filter.cap() {
            return false;
        }
        if t > 1 && self.a[t] == self.a[t - 1] {
            return false;
        }
        !(t == self.n && self.a[t] == self.a[1])
    }

    fn run(&mut self, t: usize, p: usize, zeros: usize) {
        if t > self.n {
            if self.n % p != 0 || (self.primitive_only && p != self.n) {
                return;
            }
            if !self.filter.admits(zeros) {
                return;
            }
            let letters = self.a[1..].iter().map(|&x| x + self.offset).collect();
            self.out.push(CyclicWord {
                letters,
                primitive: p == self.n,
                zeros,
            });
            return;
        }
        let inherited = self.a[t - p];
        for j in inherited..self.k {
            self.a[t] = j;
            let z = zeros + usize::from(Some(j) == self.zero_index);
            if self.admissible(t, z) {
                self.run(t + 1, if j == inherited { p } else { t }, z);
            }
        }
    }
}

/// Number of length-`n` sequences with cyclically distinct neighbours over
/// `a` letters: `tr((J − I)^n) = (a−1)^n + (a−1)(−1)^n`.
pub fn count_sequences(alphabet_size: u64, n: u32) -> u64 {
    let m = alphabet_size.saturating_sub(1);
    let base = m.pow(n);
    if n % 2 == 0 {
        base + m
    } else {
        base - m
    }
}

pub fn mobius(n: u64) -> i64 {
    let mut n = n;
    let mut result = 1i64;
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

pub fn divisors(n: usize) -> Vec<usize> {
    (1..=n).filter(|d| n % d == 0).collect()
}

/// Primitive classes of length `n` by Möbius inversion of [`count_sequences`].
pub fn primitive_class_count(alphabet_size: u64, n: u32) -> u64 {
    let total: i128 = divisors(n as usize)
        .into_iter()
        .map(|d| {
            mobius((n as usize / d) as u64) as i128 * count_sequences(alphabet_size, d as u32) as i128
        })
        .sum();
    (total / n as i128) as u64
}

/// `F(u₁⋯u_N) = 0u₁⋯u_N`.
pub fn concat_f(u: &[Letter]) -> Result<Vec<Letter>, SymbolicError> {
    check_cyclic_adjacency(u)?;
    if u[0] == 0 || u[u.len() - 1] == 0 {
        return Err(SymbolicError::BoundaryZero(format_letters(u)));
    }
    let mut w = Vec::with_capacity(u.len() + 1);
    w.push(0);
    w.extend_from_slice(u);
    Ok(w)
}

/// `G(u₁⋯u_N) = 0u₁⋯u_Nu₁`.
pub fn concat_g(u: &[Letter]) -> Result<Vec<Letter>, SymbolicError> {
    check_cyclic_adjacency(u)?;
    if u.contains(&0) {
        return Err(SymbolicError::ContainsZero(format_letters(u)));
    }
    let mut w = Vec::with_capacity(u.len() + 2);
    w.push(0);
    w.extend_from_slice(u);
    w.push(u[0]);
    check_cyclic_adjacency(&w)?;
    Ok(w)
}

/// Linear words of `A(k)`: `u₁ = 0`, `u_N ≠ 0`, exactly `k` zeros and
/// cyclically distinct neighbours, for lengths `2..=max_length`, ordered
/// by length and then lexicographically.
pub fn a_class_members(alphabet: Alphabet, k: usize, max_length: usize) -> Vec<Vec<Letter>> {
    let mut out = Vec::new();
    if alphabet.first != 0 || k == 0 {
        return out;
    }
    for n in 2..=max_length {
        let mut word = vec![0];
        a_class_fill(alphabet, k, n, 1, &mut word, &mut out);
    }
    out
}

fn a_class_fill(
    alphabet: Alphabet,
    k: usize,
    n: usize,
    zeros: usize,
    word: &mut Vec<Letter>,
    out: &mut Vec<Vec<Letter>>,
) {
    let remaining = n - word.len();
    if remaining == 0 {
        if zeros == k {
            out.push(word.clone());
        }
        return;
    }
    // Zeros cannot be adjacent and the last letter is nonzero.
    if zeros + remaining / 2 < k {
        return;
    }
    let prev = *word.last().unwrap();
    for l in alphabet.letters() {
        if l == prev {
            continue;
        }
        let z = zeros + usize::from(l == 0);
        if z > k || (remaining == 1 && l == 0) {
            continue;
        }
        word.push(l);
        a_class_fill(alphabet, k, n, z, word, out);
        word.pop();
    }
}
