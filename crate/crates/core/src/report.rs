//! Trailer line appended to every TSV report.

use std::io::Write;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `# latstd <version> seed=<seed> config=<first 12 hex digits>`
pub fn trailer(seed: u64, config_hash: &str) -> String {
    let short = &config_hash[..config_hash.len().min(12)];
    format!("# latstd {VERSION} seed={seed} config={short}")
}

pub fn write_trailer<W: Write>(out: &mut W, seed: u64, config_hash: &str) -> std::io::Result<()> {
    writeln!(out, "{}", trailer(seed, config_hash))
}

#[cfg(test)]
mod tests {
    #[test]
    fn trailer_format() {
        let t = super::trailer(7, "abcdef0123456789");
        assert_eq!(t, format!("# latstd {} seed=7 config=abcdef012345", super::VERSION));
    }
}
