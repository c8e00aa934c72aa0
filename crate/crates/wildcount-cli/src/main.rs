//! Batch computation of last-jump invariants, local counting tables, Euler
//! products over F_q(T), and asymptotics constants.
//!
//! Exit codes: 0 on success, 1 on an internal invariant violation (e.g. the
//! two last-jump routes disagree), 2 on user errors.

use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Ratio;

use wildcount::error::Error;
use wildcount::global::format_q;
use wildcount::lie::TensorAlgebra;
use wildcount::*;

type Q = Ratio<i64>;

#[derive(Parser)]
#[command(name = "wildcount", version, about = "Last-jump distributions of p-group extensions of function fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct AlgebraArgs {
    /// Built-in name ("heisenberg:k", "abelian:n1,n2,...") or a JSON file path
    #[arg(long)]
    algebra: String,
    /// Characteristic, required for built-in algebra names
    #[arg(long)]
    p: Option<u64>,
}

impl AlgebraArgs {
    fn load(&self) -> Result<LieAlgebraSpec> {
        let spec = if let Some(k) = self.algebra.strip_prefix("heisenberg:") {
            let k: usize = k
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad heisenberg rank {k:?}")))?;
            if k == 0 {
                return Err(Error::InvalidInput("heisenberg rank must be >= 1".into()));
            }
            let p = self.p.ok_or_else(|| Error::InvalidInput("--p is required".into()))?;
            LieAlgebraSpec::heisenberg(p, k)
        } else if let Some(orders) = self.algebra.strip_prefix("abelian:") {
            let orders: std::result::Result<Vec<u32>, _> =
                orders.split(',').map(str::parse).collect();
            let orders =
                orders.map_err(|_| Error::InvalidInput("bad abelian order list".into()))?;
            let p = self.p.ok_or_else(|| Error::InvalidInput("--p is required".into()))?;
            LieAlgebraSpec::abelian(p, orders)
        } else {
            let text = std::fs::read_to_string(&self.algebra)
                .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", self.algebra)))?;
            let spec = LieAlgebraSpec::from_json(&text)?;
            if let Some(p) = self.p {
                if p != spec.p {
                    return Err(Error::InvalidInput(format!(
                        "--p {p} disagrees with the algebra file (p = {})",
                        spec.p
                    )));
                }
            }
            spec
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Last jump of a local datum (both computation routes must agree)
    Lastjump {
        /// JSON file with {"field", "algebra", "support"}
        #[arg(long)]
        datum: String,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Exact distribution of last jumps up to a bound
    Distribution {
        #[command(flatten)]
        algebra: AlgebraArgs,
        /// Residue degree d of kappa = GF(p^d)
        #[arg(long, default_value_t = 1)]
        d: u32,
        /// Upper bound for tabulated jumps, as "a" or "a/b"
        #[arg(long)]
        vmax: String,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Heisenberg-specific tables
    HeisenbergTable {
        #[command(subcommand)]
        table: HeisenbergTable,
    },
    /// Global Euler-product coefficients over F_q(T)
    GlobalSeries {
        #[command(flatten)]
        algebra: AlgebraArgs,
        /// Size of the constant field (a power of p)
        #[arg(long)]
        q: u64,
        #[arg(long)]
        nmax: u32,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Asymptotics constants (A, S, B, M)
    Asymptotics {
        /// Algebra source for the generic counting constants
        #[arg(long, conflicts_with = "heisenberg")]
        algebra: Option<String>,
        #[arg(long)]
        p: Option<u64>,
        /// "p,k" for the Heisenberg (n(m), b'_m, e'_m) table
        #[arg(long)]
        heisenberg: Option<String>,
    },
}

#[derive(Subcommand)]
enum HeisenbergTable {
    /// |A_{k,m}(F_q)| by every applicable method
    Akm {
        #[arg(long)]
        k: usize,
        /// Largest m to tabulate
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = 3)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        d: u32,
    },
    /// Maximal isotropic subspace count, brute force vs closed form
    Isotropic {
        #[arg(long, default_value_t = 3)]
        p: u64,
        #[arg(long)]
        k: usize,
    },
    /// q |A_{k,m}| cross-checked against the ramification-equation count
    Local {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = 3)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        d: u32,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

fn parse_rational(s: &str) -> Result<Q> {
    let parse_err = || Error::InvalidInput(format!("bad rational {s:?}"));
    let q = match s.split_once('/') {
        Some((num, den)) => {
            let num: i64 = num.trim().parse().map_err(|_| parse_err())?;
            let den: i64 = den.trim().parse().map_err(|_| parse_err())?;
            if den == 0 {
                return Err(parse_err());
            }
            Q::new(num, den)
        }
        None => Q::from_integer(s.trim().parse().map_err(|_| parse_err())?),
    };
    if q <= Q::from_integer(0) {
        return Err(Error::InvalidInput(format!("{s:?} must be positive")));
    }
    Ok(q)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Lastjump { datum, jobs: _ } => {
            let text = std::fs::read_to_string(&datum)
                .map_err(|e| Error::InvalidInput(format!("cannot read {datum}: {e}")))?;
            let datum = LocalDatum::from_json(&text)?;
            let jump = lastjump(&datum);
            let oracle = lastjump_oracle(&datum);
            if jump != oracle {
                return Err(Error::Internal(format!(
                    "last-jump routes disagree: equations give {}, functional gives {}",
                    format_q(jump),
                    format_q(oracle)
                )));
            }
            println!("{}/{}", jump.numer(), jump.denom());
        }
        Command::Distribution { algebra, d, vmax, format, jobs } => {
            let spec = algebra.load()?;
            let field = FieldParams::new(spec.p, d)?;
            let alg = Arc::new(TensorAlgebra::new(spec, field)?);
            let v_max = parse_rational(&vmax)?;
            let dist = jump_distribution(&alg, v_max, jobs)?;
            match format {
                Format::Csv => {
                    println!("jump_num,jump_den,count");
                    for (v, c) in dist {
                        println!("{},{},{c}", v.numer(), v.denom());
                    }
                }
                Format::Json => {
                    let rows: Vec<_> = dist
                        .iter()
                        .map(|(v, c)| {
                            serde_json::json!({"jump": format_q(*v), "count": *c as u64})
                        })
                        .collect();
                    println!("{}", serde_json::Value::Array(rows));
                }
            }
        }
        Command::HeisenbergTable { table } => match table {
            HeisenbergTable::Akm { k, m, p, d } => {
                let field = FieldParams::new(p, d)?;
                let q = field.order();
                println!("k,m,q,a_km,method");
                for mi in 0..=m {
                    let value = a_km_bruteforce(k, mi, &field)?;
                    println!("{k},{mi},{q},{value},bruteforce");
                    if mi >= 1 {
                        let cs = a_km_charsum(k, mi, &field)?;
                        println!("{k},{mi},{q},{cs},charsum");
                    }
                    if mi as usize >= k {
                        let st = a_km_stable(k, &field)?;
                        println!("{k},{mi},{q},{st},stable");
                    }
                }
            }
            HeisenbergTable::Isotropic { p, k } => {
                let (brute, formula) = isotropic_count(p, k)?;
                println!("p,k,bruteforce,formula");
                println!("{p},{k},{brute},{formula}");
            }
            HeisenbergTable::Local { k, m, p, d, jobs } => {
                let field = FieldParams::new(p, d)?;
                let q = field.order();
                let count = heisenberg_local_small_v(k, &field, m, jobs)?;
                println!("k,m,q,count");
                println!("{k},{m},{q},{count}");
            }
        },
        Command::GlobalSeries { algebra, q, nmax, format, jobs } => {
            let spec = algebra.load()?;
            let series = euler_product(&spec, q, nmax, jobs)?;
            let lattice = series.lattice;
            match format {
                Format::Csv => {
                    println!("N_num,N_den,a_N");
                    for (j, &c) in series.coeffs.iter().enumerate() {
                        if c == 0 {
                            continue;
                        }
                        let n = Q::new(j as i64, lattice as i64);
                        println!("{},{},{c}", n.numer(), n.denom());
                    }
                }
                Format::Json => {
                    let rows: Vec<_> = series
                        .coeffs
                        .iter()
                        .enumerate()
                        .filter(|(_, &c)| c != 0)
                        .map(|(j, &c)| {
                            let n = Q::new(j as i64, lattice as i64);
                            serde_json::json!({"N": format_q(n), "a_N": c as u64})
                        })
                        .collect();
                    println!("{}", serde_json::Value::Array(rows));
                }
            }
        }
        Command::Asymptotics { algebra, p, heisenberg } => {
            let report = match (algebra, heisenberg) {
                (Some(algebra), None) => {
                    let spec = AlgebraArgs { algebra, p }.load()?;
                    main_theorem_constants(&spec)?
                }
                (None, Some(hk)) => {
                    let (p, k) = hk
                        .split_once(',')
                        .ok_or_else(|| Error::InvalidInput("expected \"p,k\"".into()))?;
                    let p: u64 = p
                        .trim()
                        .parse()
                        .map_err(|_| Error::InvalidInput("bad p in \"p,k\"".into()))?;
                    let k: u32 = k
                        .trim()
                        .parse()
                        .map_err(|_| Error::InvalidInput("bad k in \"p,k\"".into()))?;
                    heisenberg_constants(p, k)?
                }
                _ => {
                    return Err(Error::InvalidInput(
                        "exactly one of --algebra and --heisenberg is required".into(),
                    ))
                }
            };
            println!("{}", report.to_json());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Internal(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
