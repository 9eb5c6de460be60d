//! Batch front end for the exact-measure toolkit. Every command reads
//! declared files and flags, writes a deterministic report to stdout, and
//! exits 0 on success/pass, 1 on a verified property failure, 2 on bad input.

mod inputs;

use cantor_core::atoms::{atom_tree, isolated_paths};
use cantor_core::bits::BitString;
use cantor_core::measures::{continuity_modulus, metric_dp, MeasureError};
use cantor_core::mltests::{self, Coverage};
use cantor_core::rational::Rational;
use cantor_core::settling::{
    continuous_cover, settling_at_stage, settling_sequence, verify_ncr, SettlingError,
};
use cantor_core::transforms::{
    build_constraints, constraint_measure, continuity_repair, image_measure, rationalize,
    transport_map, TransformError,
};
use clap::{Args, Parser, Subcommand};
use inputs::{load_assignment, load_enumeration, load_family, load_functional, load_measure,
    load_test, load_tree, CliError};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "cantor", version, about = "Exact measures and tests on Cantor space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct MeasureArg {
    /// Measure: `lebesgue`, `dirac:<point>`, `bernoulli:<dyadic>`, or a
    /// measure file path.
    #[arg(long)]
    measure: String,
}

#[derive(Subcommand)]
enum Command {
    /// Print the exact mass of one cylinder.
    Eval {
        #[command(flatten)]
        measure: MeasureArg,
        /// Cylinder index (bits, or `@` for the empty string).
        #[arg(long)]
        sigma: String,
    },
    /// Distance between two measures, within `2^-precision`.
    Dist {
        /// First measure specifier.
        #[arg(long)]
        a: String,
        /// Second measure specifier.
        #[arg(long)]
        b: String,
        #[arg(long)]
        precision: u32,
    },
    /// Least level at which every cylinder mass drops to `epsilon`.
    Modulus {
        #[command(flatten)]
        measure: MeasureArg,
        /// Positive rational bound, e.g. `1/8`.
        #[arg(long)]
        epsilon: String,
        #[arg(long, default_value_t = 32)]
        max_depth: u32,
    },
    /// Threshold tree of a measure and its certified isolated paths.
    Atoms {
        #[command(flatten)]
        measure: MeasureArg,
        /// Threshold `c`, a rational in (0, 1).
        #[arg(long)]
        threshold: String,
        #[arg(long)]
        depth: u32,
    },
    /// Replace a measure by a nearby strictly positive dyadic assignment.
    Rationalize {
        #[command(flatten)]
        measure: MeasureArg,
        #[arg(long)]
        depth: usize,
    },
    /// Level map transporting a positive dyadic assignment onto uniform.
    Transport {
        /// Assignment file (`measure v1`).
        #[arg(long)]
        assignment: String,
        /// Output depth of the map.
        #[arg(long)]
        m: u32,
    },
    /// Image of a measure under a monotone functional.
    Image {
        #[command(flatten)]
        measure: MeasureArg,
        /// Functional file (`functional v1`).
        #[arg(long)]
        functional: String,
        #[arg(long)]
        depth: usize,
    },
    /// Image of a measure, repaired for continuity against an inverse
    /// candidate.
    Repair {
        #[command(flatten)]
        measure: MeasureArg,
        #[arg(long)]
        phi: String,
        #[arg(long)]
        psi: String,
        #[arg(long)]
        depth: usize,
    },
    /// Interval constraints induced by a functional pair.
    Constraints {
        #[arg(long)]
        phi: String,
        #[arg(long)]
        psi: String,
        #[arg(long)]
        depth: usize,
    },
    /// Solve the interval constraints for a cylinder assignment.
    SolveMeasure {
        #[arg(long)]
        phi: String,
        #[arg(long)]
        psi: String,
        #[arg(long)]
        depth: usize,
        /// Extra dyadic grid exponent beyond each level.
        #[arg(long, default_value_t = 8)]
        grid_exponent: u32,
    },
    /// Check the per-level budgets of a test against a measure.
    TestVerify {
        /// Test file (`mltest v1`).
        #[arg(long)]
        test: String,
        #[command(flatten)]
        measure: MeasureArg,
    },
    /// Decide per level whether a test covers the real named by a prefix.
    TestCovers {
        #[arg(long)]
        test: String,
        /// Finite prefix of the real.
        #[arg(long)]
        x: String,
    },
    /// Pull a test back along the constraint system of a functional pair.
    TestPullback {
        #[arg(long)]
        test: String,
        #[arg(long)]
        phi: String,
        #[arg(long)]
        psi: String,
        #[arg(long)]
        depth: usize,
    },
    /// Combine a tree-indexed family of test levels.
    BasisCombine {
        /// Tree file (`tree v1`).
        #[arg(long)]
        tree: String,
        /// Family file (`family v1`).
        #[arg(long)]
        family: String,
        #[arg(long)]
        n_max: u32,
        #[arg(long)]
        depth: usize,
        /// Probe prefix whose coverage prunes the surviving subtree.
        #[arg(long)]
        probe: String,
    },
    /// Settling markers and characteristic string of an enumeration.
    Settling {
        /// Enumeration file (`enum v1`).
        #[arg(long = "enum")]
        enumeration: String,
        #[arg(long)]
        length: usize,
        /// Replay the enumeration truncated to this stage.
        #[arg(long)]
        stage: Option<u64>,
    },
    /// One level of the covering test for the settling-time real.
    Cover {
        #[command(flatten)]
        measure: MeasureArg,
        #[arg(long = "enum")]
        enumeration: String,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 32)]
        max_depth: u32,
    },
    /// Budgets and coverage of the settling-time test, per level.
    VerifyNcr {
        #[command(flatten)]
        measure: MeasureArg,
        #[arg(long = "enum")]
        enumeration: String,
        #[arg(long)]
        n_max: u32,
        #[arg(long, default_value_t = 32)]
        max_depth: u32,
    },
}

enum Outcome {
    Pass,
    PropertyFailure,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::PropertyFailure) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn parse_rational(text: &str, what: &str) -> Result<Rational, CliError> {
    text.parse()
        .map_err(|e| CliError::usage(format!("{what}: {e}")))
}

fn parse_bits(text: &str, what: &str) -> Result<BitString, CliError> {
    BitString::parse_token(text).map_err(|e| CliError::usage(format!("{what}: {e}")))
}

fn run(command: Command) -> Result<Outcome, CliError> {
    match command {
        Command::Eval { measure, sigma } => {
            let mu = load_measure(&measure.measure)?;
            let sigma = parse_bits(&sigma, "--sigma")?;
            let value = mu
                .exact_value(&sigma)
                .map_err(|e| CliError::usage(format!("--sigma: {e}")))?;
            println!("{value}");
            Ok(Outcome::Pass)
        }
        Command::Dist { a, b, precision } => {
            let mu = load_measure(&a)?;
            let nu = load_measure(&b)?;
            let d = metric_dp(&mu, &nu, precision).map_err(CliError::from)?;
            println!("{d}");
            Ok(Outcome::Pass)
        }
        Command::Modulus {
            measure,
            epsilon,
            max_depth,
        } => {
            let mu = load_measure(&measure.measure)?;
            let eps = parse_rational(&epsilon, "--epsilon")?;
            match continuity_modulus(&mu, &eps, max_depth) {
                Ok(level) => {
                    println!("{level}");
                    Ok(Outcome::Pass)
                }
                Err(MeasureError::NotContinuousWithin { max_depth }) => {
                    println!("not-continuous-within {max_depth}");
                    Ok(Outcome::PropertyFailure)
                }
                Err(e) => Err(CliError::usage(e.to_string())),
            }
        }
        Command::Atoms {
            measure,
            threshold,
            depth,
        } => {
            let mu = load_measure(&measure.measure)?;
            let c = parse_rational(&threshold, "--threshold")?;
            let tree = atom_tree(&mu, &c, depth).map_err(|e| CliError::usage(e.to_string()))?;
            println!("atom tree: threshold {} depth {}", tree.threshold(), depth);
            print!("{}", tree.render());
            let widths: Vec<String> = (0..=depth).map(|l| tree.width(l).to_string()).collect();
            println!("widths: {}", widths.join(" "));
            let report = isolated_paths(&tree);
            if report.certified.is_empty() {
                println!("certified: none");
            } else {
                let paths: Vec<String> =
                    report.certified.iter().map(|p| p.to_token()).collect();
                println!("certified: {}", paths.join(", "));
            }
            if let Some(level) = report.certification_level {
                println!("certification level: {level}");
            }
            println!("inconclusive: {}", yes_no(report.inconclusive));
            Ok(Outcome::Pass)
        }
        Command::Rationalize { measure, depth } => {
            let mu = load_measure(&measure.measure)?;
            let nu = rationalize(&mu, depth).map_err(CliError::from)?;
            print!("{}", nu.to_text());
            Ok(Outcome::Pass)
        }
        Command::Transport { assignment, m } => {
            let nu = load_assignment(&assignment)?;
            match transport_map(&nu, m) {
                Ok(phi) => {
                    print!("{}", phi.to_text());
                    Ok(Outcome::Pass)
                }
                Err(TransformError::ModulusUnavailable { index }) => {
                    println!("modulus-unavailable {index}");
                    Ok(Outcome::PropertyFailure)
                }
                Err(e) => Err(CliError::usage(e.to_string())),
            }
        }
        Command::Image {
            measure,
            functional,
            depth,
        } => {
            let mu = load_measure(&measure.measure)?;
            let phi = load_functional(&functional)?;
            let img = image_measure(&mu, &phi, depth).map_err(CliError::from)?;
            print!("{}", img.to_text());
            Ok(Outcome::Pass)
        }
        Command::Repair {
            measure,
            phi,
            psi,
            depth,
        } => {
            let mu = load_measure(&measure.measure)?;
            let phi = load_functional(&phi)?;
            let psi = load_functional(&psi)?;
            let repaired =
                continuity_repair(&mu, &phi, &psi, depth).map_err(CliError::from)?;
            print!("{}", repaired.to_text());
            Ok(Outcome::Pass)
        }
        Command::Constraints { phi, psi, depth } => {
            let phi = load_functional(&phi)?;
            let psi = load_functional(&psi)?;
            let cs = build_constraints(&phi, &psi, depth).map_err(CliError::from)?;
            println!("constraints v1");
            println!("depth: {depth}");
            for (sigma, rec) in cs.records() {
                let pre: Vec<String> = rec.pre.iter().map(|p| p.to_token()).collect();
                println!(
                    "{} w={} pre={} interval=[{}, {}]",
                    sigma.to_token(),
                    rec.w.to_token(),
                    pre.join(","),
                    rec.lower,
                    rec.upper
                );
            }
            Ok(Outcome::Pass)
        }
        Command::SolveMeasure {
            phi,
            psi,
            depth,
            grid_exponent,
        } => {
            if depth > 10 {
                return Err(CliError::usage(
                    "solve-measure supports depths up to 10".to_string(),
                ));
            }
            let phi = load_functional(&phi)?;
            let psi = load_functional(&psi)?;
            let cs = build_constraints(&phi, &psi, depth).map_err(CliError::from)?;
            match constraint_measure(&cs, grid_exponent) {
                Ok(solution) => {
                    print!("{}", solution.to_text());
                    Ok(Outcome::Pass)
                }
                Err(TransformError::Infeasible { sigma }) => {
                    println!("infeasible {}", sigma.to_token());
                    Ok(Outcome::PropertyFailure)
                }
                Err(e) => Err(CliError::usage(e.to_string())),
            }
        }
        Command::TestVerify { test, measure } => {
            let t = load_test(&test)?;
            let mu = load_measure(&measure.measure)?;
            let reports = mltests::verify_bound(&t, &mu).map_err(CliError::from)?;
            let mut all_pass = true;
            for r in &reports {
                println!(
                    "level {}: sum {} budget {} open {} {}",
                    r.index,
                    r.raw_sum,
                    r.budget,
                    r.open_set_mass,
                    if r.pass { "PASS" } else { "FAIL" }
                );
                all_pass &= r.pass;
            }
            Ok(if all_pass {
                Outcome::Pass
            } else {
                Outcome::PropertyFailure
            })
        }
        Command::TestCovers { test, x } => {
            let t = load_test(&test)?;
            let x = parse_bits(&x, "--x")?;
            for (level, coverage) in t.levels().iter().zip(mltests::covers(&t, &x)) {
                match coverage {
                    Coverage::Covered(w) => {
                        println!("level {}: covered by {}", level.index, w.to_token())
                    }
                    Coverage::NotCovered => println!("level {}: not covered", level.index),
                    Coverage::Indecisive => println!("level {}: indecisive", level.index),
                }
            }
            Ok(Outcome::Pass)
        }
        Command::TestPullback {
            test,
            phi,
            psi,
            depth,
        } => {
            let t = load_test(&test)?;
            let phi = load_functional(&phi)?;
            let psi = load_functional(&psi)?;
            let cs = build_constraints(&phi, &psi, depth).map_err(CliError::from)?;
            let pulled = mltests::pullback(&t, &cs)
                .map_err(|e| CliError::usage(e.to_string()))?;
            print!("{}", pulled.to_text());
            Ok(Outcome::Pass)
        }
        Command::BasisCombine {
            tree,
            family,
            n_max,
            depth,
            probe,
        } => {
            let tree = load_tree(&tree)?;
            let family = load_family(&family)?;
            let probe = parse_bits(&probe, "--probe")?;
            if probe.len() < depth {
                return Err(CliError::usage(format!(
                    "--probe must have at least {depth} bits"
                )));
            }
            let out = mltests::basis_combine(&tree, &family, n_max, depth, &probe)
                .map_err(|e| CliError::usage(e.to_string()))?;
            print!("{}", out.test.to_text());
            for outcome in &out.outcomes {
                let nodes: Vec<String> =
                    outcome.surviving.iter().map(|t| t.to_token()).collect();
                let deepest = outcome
                    .deepest_survivor
                    .as_ref()
                    .map_or_else(|| "none".to_string(), |d| d.to_token());
                println!(
                    "# surviving {}: [{}] deepest {}",
                    outcome.index,
                    nodes.join(","),
                    deepest
                );
            }
            Ok(Outcome::Pass)
        }
        Command::Settling {
            enumeration,
            length,
            stage,
        } => {
            if length == 0 {
                return Err(CliError::usage("--length must be at least 1".to_string()));
            }
            let e = load_enumeration(&enumeration)?;
            let result = match stage {
                Some(t) => settling_at_stage(&e, t, length),
                None => settling_sequence(&e, length),
            };
            let markers: Vec<String> = result.markers.iter().map(|m| m.to_string()).collect();
            println!("markers {}", markers.join(","));
            println!("s {}", result.s);
            Ok(Outcome::Pass)
        }
        Command::Cover {
            measure,
            enumeration,
            n,
            max_depth,
        } => {
            let mu = load_measure(&measure.measure)?;
            let e = load_enumeration(&enumeration)?;
            match continuous_cover(&mu, &e, n, max_depth) {
                Ok(cover) => {
                    println!("n0 {}", cover.n0);
                    println!("n1 {}", cover.n1);
                    let strings: Vec<String> =
                        cover.level.strings.iter().map(|s| s.to_token()).collect();
                    println!("level {}: {}", cover.level.index, strings.join(", "));
                    let mut sum = Rational::zero();
                    for sigma in &cover.level.strings {
                        sum += &mu.exact_value(sigma).map_err(CliError::from)?;
                    }
                    println!("sum {}", sum);
                    println!("budget {}", cover.level.budget());
                    Ok(Outcome::Pass)
                }
                Err(SettlingError::Measure(MeasureError::NotContinuousWithin {
                    max_depth,
                })) => {
                    println!("not-continuous-within {max_depth}");
                    Ok(Outcome::PropertyFailure)
                }
                Err(e) => Err(CliError::usage(e.to_string())),
            }
        }
        Command::VerifyNcr {
            measure,
            enumeration,
            n_max,
            max_depth,
        } => {
            let mu = load_measure(&measure.measure)?;
            let e = load_enumeration(&enumeration)?;
            match verify_ncr(&mu, &e, n_max, max_depth) {
                Ok(reports) => {
                    let mut all_pass = true;
                    for r in &reports {
                        let covered = r
                            .covered_by
                            .as_ref()
                            .map_or_else(|| "none".to_string(), |w| w.to_token());
                        println!(
                            "level {}: n0 {} n1 {} sum {} budget {} pass {} covered {} zero-block {} unsettled {}",
                            r.index,
                            r.n0,
                            r.n1,
                            r.raw_sum,
                            r.budget,
                            yes_no(r.budget_pass),
                            covered,
                            yes_no(r.covered_by_zero_block),
                            yes_no(r.unsettled_approximation)
                        );
                        all_pass &= r.budget_pass && r.covered_by.is_some();
                    }
                    Ok(if all_pass {
                        Outcome::Pass
                    } else {
                        Outcome::PropertyFailure
                    })
                }
                Err(SettlingError::Measure(MeasureError::NotContinuousWithin {
                    max_depth,
                })) => {
                    println!("not-continuous-within {max_depth}");
                    Ok(Outcome::PropertyFailure)
                }
                Err(e) => Err(CliError::usage(e.to_string())),
            }
        }
    }
}
