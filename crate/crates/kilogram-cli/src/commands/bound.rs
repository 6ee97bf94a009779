use clap::Args;

use kilogram::zipf::{bound_limit, default_ss_capacity, expected_collisions, Alphabet, ZipfModel};
use kilogram::Result;

use crate::commands::parse_magnitude;

#[derive(Args)]
pub struct BoundArgs {
    /// Total n-grams in the stream, e.g. `1e15`.
    #[arg(long = "L")]
    pub stream_len: String,
    /// Bucket table size.
    #[arg(long = "B")]
    pub bucket_count: String,
    /// Whitelist size; enables the exact expected-collision formula.
    #[arg(long)]
    pub k: Option<u64>,
    /// Zipf exponent for the exact formula (default 1, the pessimistic case).
    #[arg(long)]
    pub p: Option<f64>,
    /// Alphabet size for the exact formula; 0 or absent means infinite.
    #[arg(long)]
    pub alphabet: Option<u64>,
}

pub fn run(args: BoundArgs) -> Result<()> {
    let stream_len = parse_magnitude(&args.stream_len)?;
    let bucket_count = parse_magnitude(&args.bucket_count)?;
    let limit = bound_limit(stream_len, bucket_count);
    println!("limit bound 6L/(B*pi^2) = {limit:.1}");
    if let Some(k) = args.k {
        let exponent = args.p.unwrap_or(1.0);
        let alphabet = match args.alphabet {
            None | Some(0) => Alphabet::Infinite,
            Some(a) => Alphabet::Finite(a),
        };
        let model = ZipfModel::new(exponent, alphabet)?;
        let exact = expected_collisions(k, stream_len, bucket_count, &model)?;
        println!("expected collisions (k={k}, p={exponent}, |A|={alphabet:?}) = {exact:.1}");
        println!("suggested summary capacity max(k+300000, 3k) = {}", default_ss_capacity(k));
    }
    Ok(())
}
