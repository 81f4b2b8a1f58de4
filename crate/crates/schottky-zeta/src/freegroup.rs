//! Words in the free group of rank `g` on letters `1..=2g`, where letter
//! `i + g` is the inverse of letter `i`, and the cyclic classes of such words.

use rand::Rng;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

pub type Letter = u8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("letter {letter} is outside 1..={max}")]
    LetterOutOfRange { letter: Letter, max: Letter },
    #[error("cannot parse letter token {0:?}")]
    BadToken(String),
}

/// Inverse letter under the involution `i <-> i + g`.
pub fn inverse_letter(g: usize, i: Letter) -> Letter {
    let g = g as Letter;
    if i > g {
        i - g
    } else {
        i + g
    }
}

/// A freely reduced word of the rank-`g` free group.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    g: usize,
    letters: Vec<Letter>,
}

impl Word {
    /// Free reduction of a raw letter sequence.
    pub fn reduce(g: usize, raw: &[Letter]) -> Result<Self, WordError> {
        let max = (2 * g) as Letter;
        let mut out: Vec<Letter> = Vec::with_capacity(raw.len());
        for &x in raw {
            if x == 0 || x > max {
                return Err(WordError::LetterOutOfRange { letter: x, max });
            }
            if out.last() == Some(&inverse_letter(g, x)) {
                out.pop();
            } else {
                out.push(x);
            }
        }
        Ok(Self { g, letters: out })
    }

    /// Builds a word from letters already known to be reduced.
    pub(crate) fn from_reduced(g: usize, letters: Vec<Letter>) -> Self {
        debug_assert!(letters.windows(2).all(|w| w[1] != inverse_letter(g, w[0])));
        Self { g, letters }
    }

    pub fn identity(g: usize) -> Self {
        Self { g, letters: Vec::new() }
    }

    pub fn generator(g: usize, i: Letter) -> Self {
        Self { g, letters: vec![i] }
    }

    pub fn rank(&self) -> usize {
        self.g
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Self {
            g: self.g,
            letters: self.letters.iter().rev().map(|&x| inverse_letter(self.g, x)).collect(),
        }
    }

    /// Reduced product `self * other`.
    pub fn concat(&self, other: &Self) -> Self {
        let mut raw = self.letters.clone();
        raw.extend_from_slice(&other.letters);
        Self::reduce(self.g, &raw).expect("letters of reduced words are in range")
    }

    pub fn pow(&self, n: usize) -> Self {
        let mut acc = Self::identity(self.g);
        for _ in 0..n {
            acc = acc.concat(self);
        }
        acc
    }

    /// True when the last letter does not cancel against the first.
    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.letters.first(), self.letters.last()) {
            (Some(&a), Some(&b)) => self.letters.len() == 1 || b != inverse_letter(self.g, a),
            _ => true,
        }
    }

    /// Strips matching first/last inverse pairs.
    pub fn cyclic_reduce(&self) -> Self {
        let l = &self.letters;
        let (mut i, mut j) = (0usize, l.len());
        while j >= i + 2 && l[j - 1] == inverse_letter(self.g, l[i]) {
            i += 1;
            j -= 1;
        }
        Self {
            g: self.g,
            letters: l[i..j].to_vec(),
        }
    }

    /// Cyclic shift so that letter `k` comes first.
    pub fn rotate(&self, k: usize) -> Self {
        let mut v = self.letters.clone();
        if !v.is_empty() {
            let k = k % v.len();
            v.rotate_left(k);
        }
        Self { g: self.g, letters: v }
    }

    /// Lexicographically least rotation.
    pub fn min_rotation(&self) -> Self {
        let n = self.letters.len();
        (0..n.max(1))
            .map(|k| self.rotate(k))
            .min()
            .unwrap_or_else(|| self.clone())
    }

    /// Smallest `d` dividing the length such that the word is `d`-periodic.
    pub fn primitive_period(&self) -> usize {
        let n = self.letters.len();
        (1..=n)
            .find(|&d| n % d == 0 && (0..n).all(|i| self.letters[i] == self.letters[(i + d) % n]))
            .unwrap_or(0)
    }

    /// Uniformly random reduced word of length `n`.
    pub fn random_reduced<R: Rng>(g: usize, n: usize, rng: &mut R) -> Self {
        let mut v: Vec<Letter> = Vec::with_capacity(n);
        for _ in 0..n {
            loop {
                let x = rng.random_range(1..=(2 * g) as Letter);
                if v.last().map(|&p| inverse_letter(g, p)) != Some(x) {
                    v.push(x);
                    break;
                }
            }
        }
        Self { g, letters: v }
    }

    /// Parses `"a1 a2 A1"` (capital letter = inverse; empty string = identity).
    pub fn parse(g: usize, s: &str) -> Result<Self, WordError> {
        let mut raw = Vec::new();
        for tok in s.split_whitespace() {
            let (inv, rest) = match tok.strip_prefix('a') {
                Some(r) => (false, r),
                None => match tok.strip_prefix('A') {
                    Some(r) => (true, r),
                    None => return Err(WordError::BadToken(tok.to_string())),
                },
            };
            let i: Letter = rest.parse().map_err(|_| WordError::BadToken(tok.to_string()))?;
            if i == 0 || i as usize > g {
                return Err(WordError::LetterOutOfRange {
                    letter: i,
                    max: g as Letter,
                });
            }
            raw.push(if inv { i + g as Letter } else { i });
        }
        Self::reduce(g, &raw)
    }
}

impl serde::Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_str(self)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = self.g as Letter;
        let parts: Vec<String> = self
            .letters
            .iter()
            .map(|&x| if x > g { format!("A{}", x - g) } else { format!("a{x}") })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// A conjugacy class of a cyclically reduced word, keyed by its least rotation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConjugacyClass {
    pub representative: Word,
    pub primitive: bool,
}

impl ConjugacyClass {
    pub fn of(w: &Word) -> Self {
        let r = w.cyclic_reduce().min_rotation();
        let primitive = !r.is_empty() && r.primitive_period() == r.len();
        Self {
            representative: r,
            primitive,
        }
    }

    pub fn len(&self) -> usize {
        self.representative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representative.is_empty()
    }
}

impl FromStr for Word {
    type Err = WordError;
    /// Parses with the rank inferred from the largest generator index.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let g = s
            .split_whitespace()
            .filter_map(|t| t.get(1..).and_then(|r| r.parse::<usize>().ok()))
            .max()
            .unwrap_or(1);
        Self::parse(g, s)
    }
}

/// All reduced words of length `n`, in lexicographic order.
pub fn enumerate_reduced(g: usize, n: usize) -> Vec<Word> {
    let mut out = Vec::new();
    let mut cur: Vec<Letter> = Vec::with_capacity(n);
    fn rec(g: usize, n: usize, cur: &mut Vec<Letter>, out: &mut Vec<Word>) {
        if cur.len() == n {
            out.push(Word::from_reduced(g, cur.clone()));
            return;
        }
        for x in 1..=(2 * g) as Letter {
            if cur.last().map(|&p| inverse_letter(g, p)) == Some(x) {
                continue;
            }
            cur.push(x);
            rec(g, n, cur, out);
            cur.pop();
        }
    }
    rec(g, n, &mut cur, &mut out);
    out
}

/// All cyclically reduced words of length `n`.
pub fn enumerate_cyclically_reduced(g: usize, n: usize) -> Vec<Word> {
    enumerate_reduced(g, n)
        .into_iter()
        .filter(|w| w.is_cyclically_reduced())
        .collect()
}

/// Calls `visit` on the least rotation of every cyclically reduced class of
/// length exactly `n`, together with its primitive period. Uses the
/// Fredricksen-Kessler-Maiorana necklace recursion with backtracking pruned.
pub fn for_each_class<F: FnMut(&[Letter], usize)>(g: usize, n: usize, mut visit: F) {
    if n == 0 {
        return;
    }
    let k = (2 * g) as Letter;
    let mut a: Vec<Letter> = vec![0; n + 1];
    fn rec<F: FnMut(&[Letter], usize)>(
        g: usize,
        n: usize,
        k: Letter,
        t: usize,
        p: usize,
        a: &mut Vec<Letter>,
        visit: &mut F,
    ) {
        if t > n {
            if n % p == 0 {
                let w = &a[1..=n];
                if n == 1 || w[n - 1] != inverse_letter(g, w[0]) {
                    visit(w, p);
                }
            }
            return;
        }
        let start = if t == 1 { 1 } else { a[t - p] };
        if t > 1 {
            let x = a[t - p];
            if x != inverse_letter(g, a[t - 1]) {
                a[t] = x;
                rec(g, n, k, t + 1, p, a, visit);
            }
        }
        let first = if t == 1 { start } else { start + 1 };
        for x in first..=k {
            if t > 1 && x == inverse_letter(g, a[t - 1]) {
                continue;
            }
            a[t] = x;
            rec(g, n, k, t + 1, t, a, visit);
        }
    }
    rec(g, n, k, 1, 1, &mut a, &mut visit);
}

/// Primitive classes of length `1..=max_len`, ordered by length then representative.
pub fn enumerate_primitive_classes(g: usize, max_len: usize) -> Vec<ConjugacyClass> {
    let mut out = Vec::new();
    for n in 1..=max_len {
        for_each_class(g, n, |w, p| {
            if p == n {
                out.push(ConjugacyClass {
                    representative: Word::from_reduced(g, w.to_vec()),
                    primitive: true,
                });
            }
        });
    }
    out
}

/// All classes (primitive and proper powers) of length exactly `n`.
pub fn enumerate_classes(g: usize, n: usize) -> Vec<ConjugacyClass> {
    let mut out = Vec::new();
    for_each_class(g, n, |w, p| {
        out.push(ConjugacyClass {
            representative: Word::from_reduced(g, w.to_vec()),
            primitive: p == n,
        });
    });
    out
}

/// Number of primitive classes of length `n`, counted without storing them.
pub fn count_primitive_classes(g: usize, n: usize) -> usize {
    let mut c = 0;
    for_each_class(g, n, |_, p| {
        if p == n {
            c += 1
        }
    });
    c
}
