use crate::config::{Command, Kind, RunConfig};
use crate::output::{num, Cell, Document, Table};
use crate::CliError;
use hr_sieve::envelopes::{
    check_sieve_condition, evaluate, fit_constants, EnvelopeParams, FitKind, FitResult,
    SieveCheck,
};
use hr_sieve::lemma::{fit_lemma_constant, lemma_table};
use hr_sieve::sieve::{sieve_primes, PrimeTable, TableSummary};
use hr_sieve::sifted::{count_histogram, CountHistogram};
use hr_sieve::weights::{big_g, Weight};
use serde_json::{json, Map, Value};

/// A rendered result. `success == false` maps to exit code 1 after the
/// document has been written.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub document: Document,
    pub success: bool,
}

impl From<Document> for Outcome {
    fn from(document: Document) -> Self {
        Outcome {
            document,
            success: true,
        }
    }
}

/// Runs the configured command, inside a dedicated pool when `--threads` is set.
pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Failed(format!("thread pool: {e}")))?
            .install(|| dispatch(cfg)),
        None => dispatch(cfg),
    }
}

fn dispatch(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.command {
        Command::Sieve => sieve(cfg).map(Into::into),
        Command::Count => count(cfg).map(Into::into),
        Command::Bound => bound(cfg).map(Into::into),
        Command::Fit => fit(cfg).map(Into::into),
        Command::SieveCheck => sieve_check(cfg),
        Command::Lemma => lemma(cfg).map(Into::into),
        Command::Report => report(cfg).map(Into::into),
    }
}

fn primes(cfg: &RunConfig, limit: u64) -> Result<PrimeTable, CliError> {
    Ok(sieve_primes(limit.max(2), &cfg.sieve)?)
}

fn sieve(cfg: &RunConfig) -> Result<Document, CliError> {
    let x = cfg.require_x()?;
    let summary = TableSummary::from(&primes(cfg, x)?);
    let mut table = Table::new(&["limit", "prime_count", "largest_prime"]);
    table.push(vec![
        summary.limit.into(),
        summary.prime_count.into(),
        summary.largest_prime.into(),
    ]);
    let json = table.row_object(0);
    Ok(Document { table, json })
}

fn histogram(cfg: &RunConfig, x: u64, base: &PrimeTable) -> Result<CountHistogram, CliError> {
    Ok(count_histogram(&cfg.family, x, base, &cfg.sieve)?)
}

fn count(cfg: &RunConfig) -> Result<Document, CliError> {
    let x = cfg.require_x()?;
    let base = primes(cfg, cfg.family.base_limit(x))?;
    let h = histogram(cfg, x, &base)?;
    let mut table = Table::new(&["family", "x", "s", "k", "N_k"]);
    for (k, &n) in h.counts.iter().enumerate() {
        table.push(vec![
            h.family.as_str().into(),
            x.into(),
            h.s.into(),
            k.into(),
            n.into(),
        ]);
    }
    let json = json!({
        "family": h.family,
        "x": x,
        "s": h.s,
        "total": h.total,
        "counts": h.counts,
    });
    Ok(Document { table, json })
}

/// Envelope description shared by `bound`, `fit` and `report`.
struct Envelope {
    kind: Kind,
    lambda: f64,
    weight: Option<Weight>,
}

impl Envelope {
    fn from_config(cfg: &RunConfig) -> Self {
        match cfg.envelope_kind() {
            Kind::Hr => Envelope {
                kind: Kind::Hr,
                lambda: 1.0,
                weight: None,
            },
            Kind::Theorem => Envelope {
                kind: Kind::Theorem,
                lambda: cfg.lambda_or_natural(),
                weight: Some(cfg.weight_or_natural()),
            },
        }
    }

    fn fit_kind(&self) -> FitKind {
        match &self.weight {
            None => FitKind::HardyRamanujan,
            Some(w) => FitKind::Theorem {
                lambda: self.lambda,
                weight: w.name.clone(),
            },
        }
    }

    fn params(&self, cfg: &RunConfig) -> EnvelopeParams {
        match &self.weight {
            None => EnvelopeParams::HardyRamanujan {
                c1: cfg.c1.unwrap_or(1.0),
                c2: cfg.c2.unwrap_or(0.0),
            },
            Some(w) => EnvelopeParams::Theorem {
                b: cfg.b.unwrap_or(1.0),
                c: cfg.c.unwrap_or(0.0),
                lambda: self.lambda,
                weight: w.name.clone(),
            },
        }
    }

    /// Prime table limit needed for G(x) at `x`.
    fn g_limit(&self, x: u64) -> u64 {
        if self.weight.is_some() {
            x
        } else {
            2
        }
    }

    fn gx(&self, x: u64, primes: &PrimeTable) -> Result<f64, CliError> {
        match &self.weight {
            None => Ok((x as f64).ln().ln()),
            Some(w) => Ok(big_g(w, x, primes)?),
        }
    }

    fn kind_name(&self) -> &'static str {
        match self.kind {
            Kind::Hr => "hr",
            Kind::Theorem => "theorem",
        }
    }

    fn constant_names(&self) -> [&'static str; 2] {
        match self.kind {
            Kind::Hr => ["C1", "C2"],
            Kind::Theorem => ["B", "C"],
        }
    }

    /// `kind`, `lambda`, `weight` and the two constants as JSON members.
    fn describe(&self, params: &EnvelopeParams, m: &mut Map<String, Value>) {
        let [scale, shift] = self.constant_names();
        m.insert("kind".into(), self.kind_name().into());
        m.insert("lambda".into(), num(self.lambda));
        m.insert(
            "weight".into(),
            self.weight.as_ref().map_or(Value::Null, |w| w.name.clone().into()),
        );
        m.insert(scale.into(), num(params.scale()));
        m.insert(shift.into(), num(params.shift()));
    }
}

fn bound(cfg: &RunConfig) -> Result<Document, CliError> {
    let x = cfg.require_x()?;
    if cfg.k_max == 0 {
        return Err(CliError::Usage("--k-max must be at least 1".into()));
    }
    let env = Envelope::from_config(cfg);
    let table_p = primes(cfg, env.g_limit(x))?;
    let gx = env.gx(x, &table_p)?;
    let params = env.params(cfg);
    let [scale, shift] = env.constant_names();
    let mut table = Table::new(&["kind", "lambda", "weight", scale, shift, "Gx", "x", "k", "envelope"]);
    let mut rows = Vec::new();
    for k in 1..=cfg.k_max {
        let v = params.value(x, k, gx)?;
        table.push(vec![
            env.kind_name().into(),
            env.lambda.into(),
            env.weight.as_ref().map(|w| w.name.clone()).into(),
            params.scale().into(),
            params.shift().into(),
            gx.into(),
            x.into(),
            k.into(),
            v.into(),
        ]);
        rows.push(json!({ "k": k, "envelope": num(v) }));
    }
    let mut m = Map::new();
    m.insert("x".into(), x.into());
    env.describe(&params, &mut m);
    m.insert("Gx".into(), num(gx));
    m.insert("rows".into(), rows.into());
    Ok(Document {
        table,
        json: Value::Object(m),
    })
}

fn fit_table(env: &Envelope, fit: &FitResult, h: &CountHistogram) -> Result<Table, CliError> {
    let [scale, shift] = env.constant_names();
    let mut table = Table::new(&[
        "family", "x", "kind", "lambda", "weight", scale, shift, "Gx", "k", "N_k", "envelope",
        "ratio",
    ]);
    for (&k, &ratio) in &fit.per_k_ratios {
        table.push(vec![
            fit.family.as_str().into(),
            fit.x.into(),
            env.kind_name().into(),
            env.lambda.into(),
            env.weight.as_ref().map(|w| w.name.clone()).into(),
            fit.params.scale().into(),
            fit.params.shift().into(),
            fit.gx.into(),
            k.into(),
            h.count(k).into(),
            fit.params.value(fit.x, k as u64, fit.gx)?.into(),
            ratio.into(),
        ]);
    }
    Ok(table)
}

fn ratios_json(fit: &FitResult) -> Value {
    Value::Object(
        fit.per_k_ratios
            .iter()
            .map(|(k, &r)| (k.to_string(), num(r)))
            .collect(),
    )
}

fn fit(cfg: &RunConfig) -> Result<Document, CliError> {
    let x = cfg.require_x()?;
    let env = Envelope::from_config(cfg);
    let table_p = primes(cfg, cfg.family.base_limit(x).max(env.g_limit(x)))?;
    let h = histogram(cfg, x, &table_p)?;
    let gx = env.gx(x, &table_p)?;
    let fit = fit_constants(&h, &env.fit_kind(), gx)?;
    let table = fit_table(&env, &fit, &h)?;
    let mut m = Map::new();
    m.insert("family".into(), fit.family.clone().into());
    m.insert("x".into(), x.into());
    env.describe(&fit.params, &mut m);
    m.insert("Gx".into(), num(fit.gx));
    m.insert("max_ratio".into(), num(fit.max_ratio));
    m.insert("argmax_k".into(), fit.argmax_k.into());
    m.insert("per_k_ratios".into(), ratios_json(&fit));
    Ok(Document {
        table,
        json: Value::Object(m),
    })
}

fn sieve_check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let x = cfg.require_x()?;
    let weight = cfg.weight_or_natural();
    let lambda = cfg.lambda_or_natural();
    let table_p = primes(cfg, x / cfg.family.s)?;
    let check = check_sieve_condition(&cfg.family, &weight, lambda, x, &table_p, &cfg.sieve)?;
    let mut table = Table::new(&[
        "family", "weight", "lambda", "x", "s", "outcome", "B_star", "argmax_r", "checked_r",
        "infeasible_r", "lhs",
    ]);
    let head = |outcome: &str| -> Vec<Cell> {
        vec![
            cfg.family.name.as_str().into(),
            weight.name.as_str().into(),
            lambda.into(),
            x.into(),
            cfg.family.s.into(),
            outcome.into(),
        ]
    };
    let success = match &check {
        SieveCheck::Feasible(rep) => {
            let mut row = head("feasible");
            row.extend([
                rep.b_star.into(),
                rep.argmax_r.into(),
                rep.checked_r.into(),
                Cell::Empty,
                Cell::Empty,
            ]);
            table.push(row);
            rep.holds()
        }
        SieveCheck::Infeasible { r, lhs } => {
            let mut row = head("infeasible");
            row.extend([Cell::Empty, Cell::Empty, Cell::Empty, (*r).into(), (*lhs).into()]);
            table.push(row);
            false
        }
    };
    let json = table.row_object(0);
    Ok(Outcome {
        document: Document { table, json },
        success,
    })
}

fn lemma(cfg: &RunConfig) -> Result<Document, CliError> {
    let x = cfg.require_x()?;
    let weight = cfg.weight_or_natural();
    let lambda = cfg.lambda_or_natural();
    let table_p = primes(cfg, x)?;
    let (c, fitted) = match cfg.c {
        Some(c) => (c, false),
        None => {
            let c = fit_lemma_constant(x, cfg.ell_max, &weight, lambda, &table_p)?.ok_or_else(
                || CliError::Failed("no C in [0, 10] bounds every ell; pass --c".into()),
            )?;
            (c, true)
        }
    };
    let rows = lemma_table(x, cfg.ell_max, &weight, lambda, c, &table_p)?;
    let mut table = Table::new(&[
        "x", "weight", "lambda", "C", "ell", "j", "Qj", "sum", "count", "bound", "ratio",
    ]);
    let mut json_rows = Vec::new();
    for row in &rows {
        let lead = || -> Vec<Cell> {
            vec![
                x.into(),
                weight.name.as_str().into(),
                lambda.into(),
                c.into(),
                row.ell.into(),
            ]
        };
        let mut total = lead();
        total.extend([
            Cell::Empty,
            Cell::Empty,
            row.sum.into(),
            Cell::Empty,
            row.bound.into(),
            row.ratio.into(),
        ]);
        table.push(total);
        let mut bands = Vec::new();
        for b in &row.bands {
            let mut r = lead();
            r.extend([
                b.j.into(),
                b.qj.into(),
                b.band_sum.into(),
                b.band_count.into(),
                Cell::Empty,
                Cell::Empty,
            ]);
            table.push(r);
            bands.push(json!({
                "j": b.j,
                "Qj": num(b.qj),
                "sum": num(b.band_sum),
                "count": b.band_count,
            }));
        }
        json_rows.push(json!({
            "ell": row.ell,
            "sum": num(row.sum),
            "bound": num(row.bound),
            "ratio": num(row.ratio),
            "bands": bands,
        }));
    }
    let json = json!({
        "x": x,
        "weight": weight.name,
        "lambda": num(lambda),
        "C": num(c),
        "C_fitted": fitted,
        "rows": json_rows,
    });
    Ok(Document { table, json })
}

fn report(cfg: &RunConfig) -> Result<Document, CliError> {
    let xs = if cfg.xs.is_empty() {
        vec![cfg.require_x()?]
    } else {
        cfg.xs.clone()
    };
    let fit_x = cfg.fit_x.unwrap_or(xs[0]);
    let env = Envelope::from_config(cfg);
    let top = xs.iter().copied().chain([fit_x]).max().unwrap_or(fit_x);
    let table_p = primes(cfg, cfg.family.base_limit(top).max(env.g_limit(top)))?;

    let fit_hist = histogram(cfg, fit_x, &table_p)?;
    let fit = fit_constants(&fit_hist, &env.fit_kind(), env.gx(fit_x, &table_p)?)?;

    let mut table = Table::new(&["family", "x", "k", "N_k", "envelope", "ratio"]);
    let mut blocks = Vec::new();
    for &x in &xs {
        let h = histogram(cfg, x, &table_p)?;
        let gx = env.gx(x, &table_p)?;
        let eval = evaluate(&fit.params, &h, gx)?;
        let mut rows = Vec::new();
        for (k, &n) in h.counts.iter().enumerate() {
            let (envelope, ratio) = if k == 0 {
                (None, None)
            } else {
                (
                    Some(fit.params.value(x, k as u64, gx)?),
                    eval.per_k_ratios.get(&k).copied(),
                )
            };
            table.push(vec![
                h.family.as_str().into(),
                x.into(),
                k.into(),
                n.into(),
                envelope.into(),
                ratio.into(),
            ]);
            rows.push(json!({
                "k": k,
                "N_k": n,
                "envelope": envelope.map_or(Value::Null, num),
                "ratio": ratio.map_or(Value::Null, num),
            }));
        }
        blocks.push(json!({
            "x": x,
            "Gx": num(eval.gx),
            "max_ratio": num(eval.max_ratio),
            "argmax_k": eval.argmax_k,
            "rows": rows,
        }));
    }
    let mut m = Map::new();
    m.insert("family".into(), cfg.family.name.clone().into());
    m.insert("fit_x".into(), fit_x.into());
    env.describe(&fit.params, &mut m);
    m.insert("blocks".into(), blocks.into());
    Ok(Document {
        table,
        json: Value::Object(m),
    })
}
