use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid hex character {0:?}")]
    InvalidHex(char),
    #[error("empty hex string")]
    EmptyHex,
    #[error("value needs {needed} bits but capacity is {capacity} bits")]
    Capacity { needed: usize, capacity: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("width mismatch: {left} vs {right} bits")]
    WidthMismatch { left: u32, right: u32 },
    #[error("length must be positive")]
    ZeroLength,
    #[error("invalid block configuration: {0}")]
    InvalidConfig(String),
    #[error("thread index {ltid} out of range (threads = {threads})")]
    ThreadOutOfRange { ltid: usize, threads: usize },
    #[error("invalid digit width {digit_bits} for container of {container_bits} bits")]
    InvalidDigitWidth { digit_bits: u32, container_bits: u32 },
    #[error("digit width {digit_bits} exceeds safe bound {max_safe} for convolution length {conv_len}")]
    UnsafeDigitWidth {
        digit_bits: u32,
        max_safe: u32,
        conv_len: u64,
    },
    #[error("field too small: no digit width is exact for convolution length {0}")]
    FieldTooSmall(u64),
    #[error("transform length {len} exceeds field capacity 2^{n}")]
    TransformTooLong { len: usize, n: u32 },
    #[error("aggregate of {q} values does not fit in {q}+2 digits of {digit_bits} bits")]
    SplitOverflow { q: usize, digit_bits: u32 },
    #[error("field element {value} not reduced modulo {p}")]
    NotReduced { value: u64, p: u64 },
    #[error("inverse of zero requested")]
    InverseOfZero,
    #[error("no prime of shape k*2^n+1 with n >= {n_min} below 2^{word_bits}")]
    NoPrimeFound { n_min: u32, word_bits: u32 },
    #[error("invalid field spec: {0}")]
    InvalidFieldSpec(String),
    #[error("buffer access out of range: buffer {buffer}, index {index}, len {len}")]
    OutOfRange {
        buffer: usize,
        index: usize,
        len: usize,
    },
    #[error("intra-phase conflict in phase {phase:?} at buffer {buffer}[{index}] (threads {first} and {second})")]
    PhaseConflict {
        phase: String,
        buffer: usize,
        index: usize,
        first: usize,
        second: usize,
    },
    #[error("invalid workload: {0}")]
    InvalidWorkload(String),
}
