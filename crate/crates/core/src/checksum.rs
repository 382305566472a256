/// Order-sensitive digest of 64-bit words. Used to prove that queries leave state
/// untouched and that staged and one-shot rebuilds agree.
///
/// Each word is folded in by a bijection of the accumulator, so two streams that
/// differ in exactly one word always produce different digests.
#[derive(Clone, Copy, Debug)]
pub struct Checksum(u64);

const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const PRIME: u64 = 0x9e37_79b9_7f4a_7c15;

impl Default for Checksum {
    fn default() -> Self {
        Self(OFFSET)
    }
}

impl Checksum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn word(&mut self, w: u64) -> &mut Self {
        self.0 = (self.0 ^ w).wrapping_mul(PRIME).rotate_left(23);
        self
    }

    pub fn signed(&mut self, w: i64) -> &mut Self {
        self.word(w as u64)
    }

    pub fn opt(&mut self, w: Option<i64>) -> &mut Self {
        match w {
            Some(v) => self.word(1).signed(v),
            None => self.word(0),
        }
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}
