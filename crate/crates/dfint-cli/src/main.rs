//! Batch front end: parse operators and module elements from the expression
//! language, run the engine, and print human-readable or JSON output.

use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use dfint::basis::{integral_basis_capped, IntegralBasisResult};
use dfint::coeff::K;
use dfint::decomp::{additive_decompose, integrate, AdditiveDecomposition, Integration};
use dfint::expr::{
    element_operator_string, element_string, operator_string, parse_element, parse_operator,
    poly_string, ratfunc_string, telescoper_string, OpVar,
};
use dfint::hermite::{hermite_reduce_finite, hermite_reduce_infinity};
use dfint::ore::{ModuleElement, OreOperator};
use dfint::ratfunc::RatFunc;
use dfint::telescope::{
    telescoper_with_basis, ParamAction, PartialKind, Telescoper, TelescopingResult,
};
use dfint::Error;

#[derive(Parser)]
#[command(name = "dfint", about = "Integrability and creative telescoping for D-finite functions")]
struct Cli {
    /// machine-readable output: one JSON document on stdout
    #[arg(long, global = true)]
    json: bool,
    /// raise the minimum series truncation order used in local analysis
    #[arg(long, global = true, value_name = "N")]
    truncation: Option<i64>,
    /// cap on basis enlargement steps per singular place
    #[arg(long, global = true, value_name = "N", default_value_t = 50)]
    max_enlarge: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// compute the integral bases and the normalized frame data of L
    Basis { operator: String },
    /// Hermite reduction: split f into an exact derivative and a remainder
    /// with simple finite poles and bounded infinity part
    Reduce { operator: String, element: String },
    /// full additive decomposition f = g' + (1/d) R W + (1/(x^l e)) Q2 V
    Decompose { operator: String, element: String },
    /// decide integrability and return an antiderivative when one exists
    Integrate { operator: String, element: String },
    /// find a minimal-order telescoper for 1 in C(x)[D]/<L> where the
    /// parameter operator acts by partial(1) = ut(1)
    Telescope {
        operator: String,
        ut: String,
        #[arg(long, value_enum)]
        partial: Partial,
        #[arg(long, value_name = "N")]
        max_order: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Partial {
    /// differentiation with respect to t
    Dt,
    /// shift n -> n+1
    Sn,
}

struct Outcome {
    status: &'static str,
    human: String,
    machine: Value,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.truncation {
        dfint::local::set_truncation_floor(t);
    }
    let start = Instant::now();
    match run(&cli.command, cli.max_enlarge) {
        Ok(out) => {
            if cli.json {
                let mut doc = out.machine;
                doc["status"] = json!(out.status);
                doc["time_ms"] = json!(start.elapsed().as_millis() as u64);
                println!("{}", serde_json::to_string_pretty(&doc).expect("serialize"));
            } else {
                println!("status: {}", out.status);
                print!("{}", out.human);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            if cli.json {
                let doc = json!({ "status": "error", "error": e.to_string() });
                println!("{}", serde_json::to_string_pretty(&doc).expect("serialize"));
            } else {
                eprintln!("error: {}", e);
            }
            ExitCode::from(1)
        }
    }
}

/// parameter letter for printing: the one that occurred, else a default
fn pick_param(seen: Option<char>, default: char) -> char {
    seen.unwrap_or(default)
}

fn setup(operator: &str, cap: usize) -> Result<(OreOperator, IntegralBasisResult, char), Error> {
    let parsed = parse_operator(operator, OpVar::Dx)?;
    let ib = integral_basis_capped(&parsed.op, cap)?;
    Ok((parsed.op, ib, pick_param(parsed.param, 't')))
}

fn basis_json(ib: &IntegralBasisResult, p: char) -> Value {
    json!({
        "w": ib.w.elements.iter().map(|e| element_operator_string(e, p)).collect::<Vec<_>>(),
        "v": ib.v.elements.iter().map(|e| element_operator_string(e, p)).collect::<Vec<_>>(),
        "e": poly_string(&ib.w.e, p),
        "tau": ib.tau,
        "lambda": ib.lambda,
        "b": ib.b.iter()
            .map(|row| row.iter().map(|q| poly_string(q, p)).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    })
}

fn basis_human(ib: &IntegralBasisResult, p: char) -> String {
    let mut s = String::new();
    s.push_str("integral basis W (finite places):\n");
    for (i, e) in ib.w.elements.iter().enumerate() {
        s.push_str(&format!("  w{} = {}\n", i + 1, element_operator_string(e, p)));
    }
    s.push_str("local integral basis V at infinity (v_i = x^tau_i * w_i):\n");
    for (i, e) in ib.v.elements.iter().enumerate() {
        s.push_str(&format!("  v{} = {}\n", i + 1, element_operator_string(e, p)));
    }
    s.push_str(&format!("e = {}\n", poly_string(&ib.w.e, p)));
    s.push_str(&format!("tau = {:?}\n", ib.tau));
    s.push_str(&format!("lambda = {}\n", ib.lambda));
    s.push_str("B =\n");
    for row in &ib.b {
        let cells: Vec<String> = row.iter().map(|q| poly_string(q, p)).collect();
        s.push_str(&format!("  [{}]\n", cells.join(", ")));
    }
    s
}

/// the remainder of a decomposition in the coordinates of the W basis
fn remainder_in_w(
    dec: &AdditiveDecomposition,
    ib: &IntegralBasisResult,
) -> Result<ModuleElement, Error> {
    let rem = dec.remainder(ib)?;
    ib.w.from_standard(&rem)
}

fn run(cmd: &Command, cap: usize) -> Result<Outcome, Error> {
    match cmd {
        Command::Basis { operator } => {
            let (l, ib, p) = setup(operator, cap)?;
            Ok(Outcome {
                status: "ok",
                human: basis_human(&ib, p),
                machine: json!({
                    "command": "basis",
                    "operator": operator_string(&l, OpVar::Dx, p),
                    "result": basis_json(&ib, p),
                }),
            })
        }
        Command::Reduce { operator, element } => {
            let (l, ib, p) = setup(operator, cap)?;
            let f = parse_element(element, ib.n())?;
            let fw = ib.w.from_standard(&f)?;
            let fin = hermite_reduce_finite(&fw, &ib.w)?;
            // push the infinity tail of the remainder through the reduction
            // at infinity in the V frame
            let (r, s) = dfint::decomp::split_remainder(&fin)?;
            let e_inv = RatFunc::from_poly(fin.e.clone()).inv()?;
            let scoords: Vec<RatFunc> = (0..ib.n())
                .map(|i| {
                    Ok(RatFunc::from_poly(s[i].clone())
                        .mul(&e_inv)
                        .mul(&RatFunc::x().pow(-ib.tau[i])?))
                })
                .collect::<Result<_, Error>>()?;
            let inf = hermite_reduce_infinity(&ModuleElement::from_coords(scoords), &ib.v)?;
            let g = ib.w.to_standard(&fin.g).add(&ib.v.to_standard(&inf.g));
            let dinv = RatFunc::from_poly(fin.d.clone()).inv()?;
            let rw = ModuleElement::from_coords(
                r.iter().map(|q| RatFunc::from_poly(q.clone()).mul(&dinv)).collect(),
            );
            let hv = ModuleElement::from_coords(inf.h.clone());
            let human = format!(
                "f = g' + remainder\ng = {}\nsimple part = {} over d = {}\ninfinity part = {}\n",
                element_operator_string(&g, p),
                element_string(&rw, "w", p),
                poly_string(&fin.d, p),
                element_string(&hv, "v", p),
            );
            Ok(Outcome {
                status: "ok",
                human,
                machine: json!({
                    "command": "reduce",
                    "operator": operator_string(&l, OpVar::Dx, p),
                    "element": element_operator_string(&f, p),
                    "result": {
                        "g": element_operator_string(&g, p),
                        "d": poly_string(&fin.d, p),
                        "r": r.iter().map(|q| poly_string(q, p)).collect::<Vec<_>>(),
                        "infinity": inf.h.iter().map(|q| ratfunc_string(q, p)).collect::<Vec<_>>(),
                    },
                }),
            })
        }
        Command::Decompose { operator, element } => {
            let (l, ib, p) = setup(operator, cap)?;
            let f = parse_element(element, ib.n())?;
            let dec = additive_decompose(&f, &ib, &l)?;
            let remw = remainder_in_w(&dec, &ib)?;
            let status = if dec.integrable() { "ok" } else { "not-integrable" };
            let human = format!(
                "f = g' + remainder\ng = {}\nremainder = {}\n",
                element_operator_string(&dec.g, p),
                element_string(&remw, "w", p),
            );
            Ok(Outcome {
                status,
                human,
                machine: json!({
                    "command": "decompose",
                    "operator": operator_string(&l, OpVar::Dx, p),
                    "element": element_operator_string(&f, p),
                    "result": {
                        "g": element_operator_string(&dec.g, p),
                        "d": poly_string(&dec.d, p),
                        "r": dec.r.iter().map(|q| poly_string(q, p)).collect::<Vec<_>>(),
                        "q2": dec.q2.iter().map(|q| ratfunc_string(q, p)).collect::<Vec<_>>(),
                        "remainder": element_string(&remw, "w", p),
                        "integrable": dec.integrable(),
                    },
                }),
            })
        }
        Command::Integrate { operator, element } => {
            let (l, ib, p) = setup(operator, cap)?;
            let f = parse_element(element, ib.n())?;
            match integrate(&f, &ib, &l)? {
                Integration::Integrable(g) => Ok(Outcome {
                    status: "ok",
                    human: format!("antiderivative = {}\n", element_operator_string(&g, p)),
                    machine: json!({
                        "command": "integrate",
                        "operator": operator_string(&l, OpVar::Dx, p),
                        "element": element_operator_string(&f, p),
                        "result": { "antiderivative": element_operator_string(&g, p) },
                    }),
                }),
                Integration::NotIntegrable(dec) => {
                    let remw = remainder_in_w(&dec, &ib)?;
                    Ok(Outcome {
                        status: "not-integrable",
                        human: format!("remainder = {}\n", element_string(&remw, "w", p)),
                        machine: json!({
                            "command": "integrate",
                            "operator": operator_string(&l, OpVar::Dx, p),
                            "element": element_operator_string(&f, p),
                            "result": { "remainder": element_string(&remw, "w", p) },
                        }),
                    })
                }
            }
        }
        Command::Telescope {
            operator,
            ut,
            partial,
            max_order,
        } => {
            let (kind, var, default_param) = match partial {
                Partial::Dt => (PartialKind::Derivation, OpVar::Dt, 't'),
                Partial::Sn => (PartialKind::Shift, OpVar::Sn, 'n'),
            };
            let parsed_l = parse_operator(operator, OpVar::Dx)?;
            let parsed_u = parse_operator(ut, OpVar::Dx)?;
            let p = pick_param(parsed_l.param.or(parsed_u.param), default_param);
            let l = parsed_l.op;
            let ib = integral_basis_capped(&l, cap)?;
            let action = ParamAction::new(kind, parsed_u.op.clone());
            let f = ModuleElement::unit(ib.n(), 0);
            match telescoper_with_basis(&f, &l, &action, &ib, *max_order)? {
                TelescopingResult::Found(t) => Ok(telescope_outcome(
                    &t, &l, &parsed_u.op, var, p, operator, ut,
                )),
                TelescopingResult::NoneUpToOrder(bound) => Ok(Outcome {
                    status: "none-up-to-bound",
                    human: format!("no telescoper of order <= {}\n", bound),
                    machine: json!({
                        "command": "telescope",
                        "operator": operator_string(&l, OpVar::Dx, p),
                        "ut": operator_string(&parsed_u.op, OpVar::Dx, p),
                        "result": { "order_bound": bound },
                    }),
                }),
            }
        }
    }
}

fn telescope_outcome(
    t: &Telescoper,
    l: &OreOperator,
    u: &OreOperator,
    var: OpVar,
    p: char,
    _operator: &str,
    _ut: &str,
) -> Outcome {
    let tele = telescoper_string(&t.coeffs, var, p);
    let cert = element_operator_string(&t.certificate, p);
    Outcome {
        status: "ok",
        human: format!("telescoper = {}\ncertificate = {}\n", tele, cert),
        machine: json!({
            "command": "telescope",
            "operator": operator_string(l, OpVar::Dx, p),
            "ut": operator_string(u, OpVar::Dx, p),
            "result": {
                "telescoper": tele,
                "order": t.order(),
                "coefficients": t.coeffs.iter()
                    .map(|c| k_string(c, p))
                    .collect::<Vec<_>>(),
                "certificate": cert,
            },
        }),
    }
}

/// a coefficient of the constant field as a grammar string
fn k_string(c: &K, p: char) -> String {
    ratfunc_string(&RatFunc::constant(c.clone()), p)
}
