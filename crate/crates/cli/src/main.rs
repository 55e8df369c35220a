//! `bwcodec`: encode payloads into n x n arrays with bounded row and column
//! weights, decode them back, verify arrays and run the analysis checks.

use std::fmt;
use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use bwcodec::analysis::{
    check_lemma1, check_lemma2, count_arrays, legacy_c_bound, rate_report, redundancy_rows,
};
use bwcodec::{derive_params, verify_membership, BitGrid, BitSeq, CodeParams, Codec};
use clap::{Args, Parser, Subcommand, ValueEnum};

const EXIT_USAGE: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_FAILURE: u8 = 3;

#[derive(Parser)]
#[command(name = "bwcodec", version, about = "Bounded-weight 2D array codec")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the code parameters for (n, f).
    Params(Shape),
    /// Encode a payload file into an n x n array.
    Encode {
        #[command(flatten)]
        shape: Shape,
        #[command(flatten)]
        io: Io,
    },
    /// Decode an array back into its payload file.
    Decode {
        #[command(flatten)]
        shape: Shape,
        #[command(flatten)]
        io: Io,
    },
    /// Check every row and column weight of an array against f.
    Verify {
        #[command(flatten)]
        shape: Shape,
        /// Input array file ("-" or absent for stdin).
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run the combinatorial analysis checks.
    #[command(subcommand)]
    Analyze(Analyze),
}

#[derive(Args)]
struct Shape {
    /// Array side length.
    #[arg(long)]
    n: usize,
    /// Weight bound f(n) as P, P/Q, or "half" for n/2.
    #[arg(long = "f")]
    f: String,
}

#[derive(Args)]
struct Io {
    /// Input file ("-" or absent for stdin).
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Output file ("-" or absent for stdout).
    #[arg(long = "out")]
    output: Option<PathBuf>,
    /// Array file form.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// n lines of n '0'/'1' characters.
    Text,
    /// Row-major bits, MSB-first, zero-padded to whole bytes.
    Binary,
}

#[derive(Subcommand)]
enum Analyze {
    /// Count n x n arrays with all row and column weights at most w.
    Count {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        w: usize,
        /// Allow enumeration beyond the default size guard.
        #[arg(long)]
        allow_large: bool,
    },
    /// Exhaustively check the two swap lemmas up to a length.
    Lemmas {
        #[arg(long, default_value_t = 6)]
        max_n: usize,
    },
    /// Tabulate rates over a list of sizes.
    Rates {
        /// Weight bound applied at every size: P, P/Q, or "half".
        #[arg(long = "f")]
        f: String,
        /// Comma-separated sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
    },
    /// Compare the earlier redundancy-row count with the current one.
    LegacyC {
        #[arg(long)]
        n: usize,
        #[arg(long = "f")]
        f: String,
    },
}

/// Terminal failure: message for stderr and the process status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<bwcodec::Error> for Failure {
    fn from(e: bwcodec::Error) -> Self {
        let message = match &e {
            bwcodec::Error::Infeasible(reason) => format!("infeasible: {reason}"),
            bwcodec::Error::Corrupt { stage, detail } => {
                format!("corrupt codeword at {stage} stage: {detail}")
            }
            other => other.to_string(),
        };
        Self {
            code: e.exit_code() as u8,
            message,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

type CliResult<T> = Result<T, Failure>;

/// Appends one line to a command report.
macro_rules! outln {
    ($out:expr, $($arg:tt)*) => {{
        use std::fmt::Write as _;
        let _ = writeln!($out, $($arg)*);
    }};
}

/// Parses `P`, `P/Q` or `half` into a ratio evaluated at `n`.
fn parse_f(spec: &str, n: usize) -> CliResult<(u64, u64)> {
    let spec = spec.trim();
    if spec == "half" {
        return Ok((n as u64, 2));
    }
    let bad = || Failure::usage(format!("bad f-spec {spec:?}: expected P, P/Q or half"));
    let (p, q) = match spec.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (spec, "1"),
    };
    let p: u64 = p.parse().map_err(|_| bad())?;
    let q: u64 = q.parse().map_err(|_| bad())?;
    Ok((p, q))
}

fn params_for(shape: &Shape) -> CliResult<CodeParams> {
    let (p, q) = parse_f(&shape.f, shape.n)?;
    Ok(derive_params(shape.n, p, q)?)
}

fn is_stdio(path: &Option<PathBuf>) -> bool {
    path.as_ref().is_none_or(|p| p.as_os_str() == "-")
}

fn read_input(path: &Option<PathBuf>) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    if is_stdio(path) {
        io::stdin()
            .read_to_end(&mut buf)
            .map_err(|e| Failure::usage(format!("reading stdin: {e}")))?;
    } else {
        let p = path.as_ref().unwrap();
        buf = fs::read(p).map_err(|e| Failure::usage(format!("reading {}: {e}", p.display())))?;
    }
    Ok(buf)
}

fn write_output(path: &Option<PathBuf>, bytes: &[u8]) -> CliResult<()> {
    if is_stdio(path) {
        let mut out = io::stdout().lock();
        out.write_all(bytes)
            .and_then(|_| out.flush())
            .map_err(|e| Failure::usage(format!("writing stdout: {e}")))
    } else {
        let p = path.as_ref().unwrap();
        fs::write(p, bytes).map_err(|e| Failure::usage(format!("writing {}: {e}", p.display())))
    }
}

/// Reads `len` bits MSB-first from exactly `ceil(len / 8)` bytes whose pad
/// bits are zero.
fn bits_from_exact_bytes(bytes: &[u8], len: usize, what: &str) -> CliResult<BitSeq> {
    let want = len.div_ceil(8);
    if bytes.len() != want {
        return Err(Failure::usage(format!(
            "{what} must be exactly {want} bytes ({len} bits), got {} bytes",
            bytes.len()
        )));
    }
    if !len.is_multiple_of(8) && bytes[want - 1] & (0xff >> (len % 8)) != 0 {
        return Err(Failure::usage(format!("{what} has nonzero pad bits")));
    }
    Ok(BitSeq::from_bytes(bytes, len)?)
}

fn parse_grid(bytes: &[u8], n: usize, format: Format) -> CliResult<BitGrid> {
    match format {
        Format::Binary => {
            let bits = bits_from_exact_bytes(bytes, n * n, "binary array file")?;
            Ok(BitGrid::from_row_major(n, n, &bits)?)
        }
        Format::Text => {
            let text = std::str::from_utf8(bytes)
                .map_err(|_| Failure::usage("text array file is not UTF-8"))?;
            let body = text.strip_suffix('\n').unwrap_or(text);
            let lines: Vec<&str> = body.split('\n').collect();
            if lines.len() != n {
                return Err(Failure::usage(format!(
                    "text array file has {} lines, expected {n}",
                    lines.len()
                )));
            }
            for (i, line) in lines.iter().enumerate() {
                if line.len() != n || !line.bytes().all(|b| b == b'0' || b == b'1') {
                    return Err(Failure::usage(format!(
                        "line {} must be {n} characters of '0'/'1'",
                        i + 1
                    )));
                }
            }
            Ok(BitGrid::from_rows(&lines)?)
        }
    }
}

fn render_grid(g: &BitGrid, format: Format) -> Vec<u8> {
    match format {
        Format::Text => g.to_string().into_bytes(),
        Format::Binary => g.row_major().to_bytes(),
    }
}

fn cmd_params(shape: &Shape, out: &mut String) -> CliResult<()> {
    let p = match params_for(shape) {
        Ok(p) => p,
        Err(f) => {
            // the infeasibility reason is the report for this command
            if f.code == EXIT_INFEASIBLE {
                outln!(out, "{f}");
            }
            return Err(f);
        }
    };
    let (num, den) = p.rate_fraction();
    outln!(
        out,
        "n={} f={} c={} m={} k_row={} payload={} redundancy={} rate={:.6}",
        p.n,
        p.f_display(),
        p.c,
        p.m,
        p.k_row,
        p.payload_bits_total,
        p.redundancy(),
        p.rate()
    );
    outln!(out, "n                  {}", p.n);
    outln!(out, "p                  {}", p.p);
    outln!(out, "q                  {}", p.q);
    outln!(out, "beta               {}", p.beta);
    outln!(out, "r_blocks           {}", p.r_blocks);
    outln!(out, "c                  {}", p.c);
    outln!(out, "m                  {}", p.m);
    outln!(out, "w_max              {}", p.w_max);
    outln!(out, "alpha              {}/{}", p.alpha_num, p.alpha_den);
    outln!(out, "k_row              {}", p.k_row);
    outln!(out, "payload_bits_total {}", p.payload_bits_total);
    outln!(out, "redundancy         {}", p.redundancy());
    outln!(out, "rate               {num}/{den}");
    Ok(())
}

fn cmd_encode(shape: &Shape, io: &Io) -> CliResult<()> {
    let codec = Codec::new(params_for(shape)?)?;
    let bytes = read_input(&io.input)?;
    let msg = bits_from_exact_bytes(&bytes, codec.payload_bits(), "payload file")?;
    let g = codec.encode(&msg)?;
    write_output(&io.output, &render_grid(&g, io.format))
}

fn cmd_decode(shape: &Shape, io: &Io) -> CliResult<()> {
    let codec = Codec::new(params_for(shape)?)?;
    let g = parse_grid(&read_input(&io.input)?, shape.n, io.format)?;
    let msg = codec.decode(&g)?;
    write_output(&io.output, &msg.to_bytes())
}

fn cmd_verify(
    shape: &Shape,
    input: &Option<PathBuf>,
    format: Format,
    out: &mut String,
) -> CliResult<()> {
    let (p, q) = parse_f(&shape.f, shape.n)?;
    if q == 0 {
        return Err(Failure::usage("f-spec has zero denominator"));
    }
    let g = parse_grid(&read_input(input)?, shape.n, format)?;
    let report = verify_membership(&g, p, q);
    if report.ok {
        outln!(out, "OK");
        return Ok(());
    }
    for v in &report.violations {
        outln!(out, "{v}");
    }
    Err(Failure {
        code: EXIT_FAILURE,
        message: format!("{} weight violations", report.violations.len()),
    })
}

fn cmd_analyze(cmd: &Analyze, out: &mut String) -> CliResult<()> {
    match cmd {
        Analyze::Count { n, w, allow_large } => {
            if w > n {
                return Err(Failure::usage(format!("w={w} exceeds n={n}")));
            }
            outln!(out, "{}", count_arrays(*n, *w, *allow_large)?);
        }
        Analyze::Lemmas { max_n } => {
            let reports = [check_lemma1(*max_n)?, check_lemma2(*max_n)?];
            for r in &reports {
                outln!(out, "{r}");
                for s in &r.samples {
                    outln!(out, "  {s}");
                }
            }
            if reports.iter().any(|r| !r.passed()) {
                return Err(Failure {
                    code: EXIT_FAILURE,
                    message: "lemma counterexamples found".into(),
                });
            }
        }
        Analyze::Rates { f, n } => {
            let entries = n
                .iter()
                .map(|&n| parse_f(f, n).map(|(p, q)| (n, p, q)))
                .collect::<CliResult<Vec<_>>>()?;
            let report = rate_report(&entries);
            for row in &report.rows {
                outln!(out, "{row}");
            }
            outln!(
                out,
                "strictly increasing: {}",
                if report.strictly_increasing() {
                    "yes"
                } else {
                    "no"
                }
            );
        }
        Analyze::LegacyC { n, f } => {
            let (p, q) = parse_f(f, *n)?;
            if q == 0 || p == 0 {
                return Err(Failure::usage("f must be a positive ratio"));
            }
            match legacy_c_bound(*n, p, q) {
                Some(c) => outln!(out, "legacy c={c}"),
                None => outln!(out, "legacy c=undefined"),
            }
            outln!(out, "c={}", redundancy_rows(*n, p, q));
        }
    }
    Ok(())
}

fn run(cli: &Cli, out: &mut String) -> CliResult<()> {
    match &cli.command {
        Command::Params(shape) => cmd_params(shape, out),
        Command::Encode { shape, io } => cmd_encode(shape, io),
        Command::Decode { shape, io } => cmd_decode(shape, io),
        Command::Verify {
            shape,
            input,
            format,
        } => cmd_verify(shape, input, *format, out),
        Command::Analyze(cmd) => cmd_analyze(cmd, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let mut report = String::new();
    let result = run(&cli, &mut report);
    if let Err(e) = io::stdout().lock().write_all(report.as_bytes()) {
        if e.kind() != io::ErrorKind::BrokenPipe {
            eprintln!("bwcodec: writing stdout: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("bwcodec: {f}");
            ExitCode::from(f.code)
        }
    }
}
