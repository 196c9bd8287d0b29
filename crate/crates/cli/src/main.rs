mod report;

use clap::{Args, Parser, Subcommand};
use freebound::fdcore::{Coefficients, DiscreteOperator};
use freebound::greens::{discrete_green_columns, discrete_green_rows, max_abs, pde_block};
use freebound::grid::Grid;
use freebound::option::MarketParams;
use freebound::study::{
    american_study, bvp_obstacle_study, moving_boundary_study, AmericanStudy, BvpStudy, Execution, MovingBoundaryStudy,
};
use report::{GreensRow, Record, Table};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

type AnyResult<T> = std::result::Result<T, Box<dyn std::error::Error>>;

/// Exit status when any level reports a degraded run.
const DEGRADED: u8 = 3;

#[derive(Parser)]
#[command(name = "freebound", version, about = "Free and moving boundary LCP solver: convergence studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Shared {
    /// Number of deferred-correction phases (1 to 4).
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u8).range(1..=4))]
    phases: u8,
    /// Penalty iteration tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// CSV table path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run record path (JSON).
    #[arg(long)]
    json: Option<PathBuf>,
    /// Run the levels one at a time.
    #[arg(long)]
    sequential: bool,
}

impl Shared {
    fn mode(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Elliptic obstacle problem f'' - f - 1 on [-1, 1] with obstacle x.
    BvpObstacle {
        /// Interval counts, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [30usize, 60, 120, 240, 480])]
        n: Vec<usize>,
        #[arg(long, default_value_t = 1e12)]
        rho: f64,
        #[arg(long, default_value_t = 0.2)]
        probe: f64,
        #[command(flatten)]
        shared: Shared,
    },
    /// Moving boundary test problem on [-2, 2] with exact startup.
    MbTest {
        #[arg(long, value_delimiter = ',', default_values_t = [160usize])]
        nx: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [320usize])]
        nt: Vec<usize>,
        #[arg(long, default_value_t = 1e8)]
        rho: f64,
        #[arg(long, default_value_t = 0.0)]
        probe: f64,
        /// Physical end time.
        #[arg(long, default_value_t = 0.5)]
        horizon: f64,
        #[command(flatten)]
        shared: Shared,
    },
    /// American put at S = K; the error column holds changes between levels.
    American {
        #[arg(long, default_value_t = 0.2)]
        sigma: f64,
        #[arg(long, default_value_t = 0.1)]
        r: f64,
        /// Continuous dividend yield.
        #[arg(long, default_value_t = 0.0)]
        div: f64,
        #[arg(long, default_value_t = 100.0)]
        strike: f64,
        #[arg(long, default_value_t = 0.25)]
        expiry: f64,
        #[arg(long, default_value_t = 1000.0)]
        smax: f64,
        #[arg(long, default_value_t = 125.0 / 6.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0.05)]
        beta: f64,
        #[arg(long, default_value_t = 12)]
        tskip: usize,
        #[arg(long, default_value_t = 1e8)]
        rho: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [53usize])]
        nx: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [30usize])]
        nt: Vec<usize>,
        #[command(flatten)]
        shared: Shared,
    },
    /// First rows and columns of the inverse PDE block for the Black-Scholes
    /// operator with the front at a fixed fraction of a uniform grid.
    GreensDiag {
        #[arg(long, default_value_t = 0.2)]
        sigma: f64,
        #[arg(long, default_value_t = 0.1)]
        r: f64,
        #[arg(long, default_value_t = 89.748)]
        front: f64,
        #[arg(long, default_value_t = 1000.0)]
        smax: f64,
        #[arg(long, default_value_t = 100.0)]
        strike: f64,
        /// Nodes left of the front per level, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [20usize, 40, 80, 160])]
        n: Vec<usize>,
        /// Position of the front inside its interval, in (0, 1).
        #[arg(long, default_value_t = 0.4)]
        theta: f64,
        /// Time step; probes 25/12 I - k L instead of -L.
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        /// CSV dump of the first two columns at the finest level.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
}

fn pairs(nx: &[usize], nt: &[usize]) -> AnyResult<Vec<(usize, usize)>> {
    if nx.len() != nt.len() {
        return Err(format!("--nx has {} entries but --nt has {}", nx.len(), nt.len()).into());
    }
    Ok(nx.iter().copied().zip(nt.iter().copied()).collect())
}

fn finish(table: Table, record: Record, shared: &Shared) -> AnyResult<bool> {
    print!("{}", table.render());
    if let Some(path) = &shared.out {
        table.write_csv(path)?;
    }
    if let Some(path) = &shared.json {
        record.with_table(&table).write(path)?;
    }
    Ok(table.degraded())
}

fn run(cli: Cli) -> AnyResult<bool> {
    let start = Instant::now();
    match cli.command {
        Command::BvpObstacle { n, rho, probe, shared } => {
            let cfg = BvpStudy { rho, probe, phases: shared.phases as usize, tol: shared.tol };
            let levels = bvp_obstacle_study(&n, &cfg, shared.mode())?;
            let table = Table::new("error", &levels);
            let mut rec = Record::new("bvp-obstacle", start);
            rec.param("n", n.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
            rec.param("rho", rho);
            rec.param("probe", probe);
            rec.shared(shared.phases as usize, shared.tol);
            finish(table, rec, &shared)
        }
        Command::MbTest { nx, nt, rho, probe, horizon, shared } => {
            let cfg = MovingBoundaryStudy { rho, probe, phases: shared.phases as usize, tol: shared.tol, horizon };
            let levels = moving_boundary_study(&pairs(&nx, &nt)?, &cfg, shared.mode())?;
            let table = Table::new("error", &levels);
            let mut rec = Record::new("mb-test", start);
            rec.list("nx", &nx);
            rec.list("nt", &nt);
            rec.param("rho", rho);
            rec.param("probe", probe);
            rec.param("horizon", horizon);
            rec.shared(shared.phases as usize, shared.tol);
            finish(table, rec, &shared)
        }
        Command::American { sigma, r, div, strike, expiry, smax, alpha, beta, tskip, rho, nx, nt, shared } => {
            let params = MarketParams::new(sigma, r, div, strike, expiry)?;
            let cfg = AmericanStudy {
                params,
                s_max: smax,
                alpha,
                beta,
                t_skip: tskip,
                rho,
                phases: shared.phases as usize,
                tol: shared.tol,
            };
            let levels = american_study(&pairs(&nx, &nt)?, &cfg, shared.mode())?;
            let table = Table::new("change", &levels);
            let mut rec = Record::new("american", start);
            for (k, v) in [
                ("sigma", sigma),
                ("r", r),
                ("div", div),
                ("strike", strike),
                ("expiry", expiry),
                ("smax", smax),
                ("alpha", alpha),
                ("beta", beta),
                ("rho", rho),
            ] {
                rec.param(k, v);
            }
            rec.param("tskip", tskip);
            rec.list("nx", &nx);
            rec.list("nt", &nt);
            rec.shared(shared.phases as usize, shared.tol);
            finish(table, rec, &shared)
        }
        Command::GreensDiag { sigma, r, front, smax, strike, n, theta, step, out, json, dump } => {
            if !(0.0 < theta && theta < 1.0) || !(0.0 < front && front < smax) {
                return Err(format!("need 0 < theta < 1 and 0 < front < smax, got {theta}, {front}").into());
            }
            let mut rows = Vec::new();
            let mut finest = None;
            for (level, &jf) in n.iter().enumerate() {
                let h = front / (jf as f64 + theta);
                let last = (smax / h).ceil() as usize;
                let grid = Grid::from_nodes((0..=last).map(|j| j as f64 * h).collect())?;
                let op = DiscreteOperator::assemble(
                    &grid,
                    |s| Coefficients { p: 0.5 * sigma * sigma * s * s, w: r * s, z: -r, g: 0.0 },
                    (strike, 0.0),
                )?;
                let block = match step {
                    Some(k) => op.l.scaled_plus_identity(-k, 25.0 / 12.0).trailing_block(jf),
                    None => pde_block(&op.l, jf),
                };
                let cols = discrete_green_columns(&block, &[0, 1])?;
                let rws = discrete_green_rows(&block, &[0, 1])?;
                let col_max = max_abs(&cols).into_iter().fold(0.0, f64::max);
                let row_max = max_abs(&rws).into_iter().fold(0.0, f64::max);
                rows.push(GreensRow { level, n_front: jf, h, col_max, row_max });
                finest = Some((grid, jf, cols));
            }
            let table = report::greens_table(&rows);
            print!("{}", report::render_greens(&rows));
            if let Some(path) = &out {
                report::write_rows(path, &table)?;
            }
            if let (Some(path), Some((grid, jf, cols))) = (&dump, &finest) {
                let mut dumped = vec![vec!["s".to_string(), "col0".into(), "col1".into()]];
                for i in 0..cols[0].len() {
                    let s = grid.node(jf + 1 + i);
                    dumped.push(vec![report::full(s), report::full(cols[0][i]), report::full(cols[1][i])]);
                }
                report::write_rows(path, &dumped)?;
            }
            if let Some(path) = &json {
                let mut rec = Record::new("greens-diag", start);
                for (k, v) in [("sigma", sigma), ("r", r), ("front", front), ("smax", smax), ("strike", strike), ("theta", theta)] {
                    rec.param(k, v);
                }
                if let Some(k) = step {
                    rec.param("step", k);
                }
                rec.list("n", &n);
                rec.with_rows(&table).write(path)?;
            }
            Ok(false)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("error: at least one level degraded (front or jump estimation failed); see warnings above");
            ExitCode::from(DEGRADED)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
