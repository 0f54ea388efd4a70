//! Report writers. JSON output is one object per line with the summary as
//! the last line; pretty output prints the same numbers in shortest
//! round-trip form.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::ValueEnum;
use serde::Serialize;

use opineq::catalog::ClaimStatus;
use opineq::suite::{CheckReport, SuiteReport};
use opineq::{FunctionClass, SampleVerdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Pretty,
}

const CSV_HEADER: [&str; 16] = [
    "check_id", "seed", "trial", "dim", "verdict", "margin", "expected_fail", "findings", "function", "function2", "v",
    "r", "k", "s", "t", "notes",
];

#[derive(Serialize)]
struct SummaryLine<'a> {
    summary: &'a SuiteReport,
}

/// True for the trailing summary object of a JSON report stream.
pub fn is_summary_line(line: &str) -> bool {
    serde_json::from_str::<serde_json::Value>(line).is_ok_and(|v| v.get("summary").is_some())
}

pub struct Sink {
    format: Format,
    out: Box<dyn Write>,
    csv: Option<csv::Writer<Box<dyn Write>>>,
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|x| x.to_string()).unwrap_or_default()
}

impl Sink {
    pub fn open(path: Option<&PathBuf>, format: Format) -> io::Result<Sink> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout())),
        };
        Ok(Sink { format, out, csv: None })
    }

    fn csv_writer(&mut self) -> &mut csv::Writer<Box<dyn Write>> {
        if self.csv.is_none() {
            let out = std::mem::replace(&mut self.out, Box::new(io::sink()));
            self.csv = Some(csv::Writer::from_writer(out));
        }
        self.csv.as_mut().unwrap()
    }

    pub fn json_line<T: Serialize>(&mut self, x: &T) -> io::Result<()> {
        writeln!(self.out, "{}", serde_json::to_string(x).map_err(io::Error::other)?)
    }

    pub fn text(&mut self, s: &str) -> io::Result<()> {
        writeln!(self.out, "{s}")
    }

    pub fn reports(&mut self, reports: &[CheckReport]) -> io::Result<()> {
        match self.format {
            Format::Json => reports.iter().try_for_each(|r| self.json_line(r)),
            Format::Pretty => reports.iter().try_for_each(|r| {
                let line = pretty_report(r);
                self.text(&line)
            }),
            Format::Csv => {
                let w = self.csv_writer();
                w.write_record(CSV_HEADER)?;
                for r in reports {
                    let i = &r.instance;
                    w.write_record([
                        r.check_id.to_string(),
                        i.seed.to_string(),
                        i.trial.to_string(),
                        i.dim.to_string(),
                        format!("{:?}", r.verdict).to_lowercase(),
                        r.margin.to_string(),
                        r.expected_fail.to_string(),
                        r.findings.len().to_string(),
                        opt(i.function.as_ref().map(|f| f.id())),
                        opt(i.function2.as_ref().map(|f| f.id())),
                        opt(i.v),
                        opt(i.r),
                        opt(i.k),
                        opt(i.s),
                        opt(i.t),
                        r.notes.clone(),
                    ])?;
                }
                Ok(())
            }
        }
    }

    /// JSON: trailing `{"summary": …}` line. Pretty: a table. CSV: the
    /// table goes to stderr so the file stays rectangular.
    pub fn summary(&mut self, s: &SuiteReport) -> io::Result<()> {
        match self.format {
            Format::Json => self.json_line(&SummaryLine { summary: s }),
            Format::Pretty => {
                let t = pretty_summary(s);
                self.text(&t)
            }
            Format::Csv => {
                eprintln!("{}", pretty_summary(s));
                Ok(())
            }
        }
    }

    pub fn classify_csv(
        &mut self,
        function: &str,
        class: FunctionClass,
        claim: ClaimStatus,
        disagreement: bool,
        v: &SampleVerdict,
    ) -> io::Result<()> {
        let fresh = self.csv.is_none();
        let w = self.csv_writer();
        if fresh {
            w.write_record(["function", "class", "claim", "holds", "trials", "worst_margin", "first_failure", "disagreement"])?;
        }
        w.write_record([
            function.to_string(),
            class.to_string(),
            format!("{claim:?}"),
            v.holds.to_string(),
            v.trials.to_string(),
            v.worst_margin.to_string(),
            opt(v.first_failure),
            disagreement.to_string(),
        ])?;
        Ok(())
    }

    pub fn finish(mut self) -> io::Result<()> {
        if let Some(mut w) = self.csv.take() {
            w.flush()?;
        }
        self.out.flush()
    }
}

/// Shortest round-trip digits in exponent form.
fn sci(x: f64) -> String {
    format!("{x:e}")
}

fn pretty_report(r: &CheckReport) -> String {
    let i = &r.instance;
    let mut s = format!(
        "{:<24} seed {:>20} trial {:>5} n {} {:<7} margin {}",
        r.check_id.as_str(),
        i.seed,
        i.trial,
        i.dim,
        format!("{:?}", r.verdict).to_lowercase(),
        sci(r.margin)
    );
    if let Some(f) = &i.function {
        s.push_str(&format!(" f={}", f.id()));
    }
    if r.expected_fail {
        s.push_str(" (expected failure)");
    }
    for f in &r.findings {
        s.push_str(&format!("\n    finding: {f}"));
    }
    if r.verdict != opineq::suite::Verdict::Pass && !r.notes.is_empty() {
        s.push_str(&format!("\n    {}", r.notes));
    }
    s
}

pub fn pretty_summary(s: &SuiteReport) -> String {
    let mut out = format!(
        "{:<24} {:>6} {:>6} {:>5} {:>5} {:>8} {:>10} {:>8}  worst margin\n",
        "check", "trials", "pass", "fail", "skip", "controls", "unexpected", "findings"
    );
    for c in &s.checks {
        out.push_str(&format!(
            "{:<24} {:>6} {:>6} {:>5} {:>5} {:>4}/{:<3} {:>10} {:>8}  {}\n",
            c.check_id.as_str(),
            c.trials,
            c.passed,
            c.failed,
            c.skipped,
            c.controls_fired,
            c.controls,
            c.unexpected,
            c.findings,
            c.worst_margin.map(sci).unwrap_or_default()
        ));
    }
    out.push_str(&format!(
        "total {} reports, {} unexpected, {} expected failures, {} skipped, {} findings",
        s.total, s.unexpected, s.expected_failures, s.skipped, s.findings
    ));
    out
}

pub fn pretty_classify(
    function: &str,
    class: FunctionClass,
    claim: ClaimStatus,
    disagreement: bool,
    v: &SampleVerdict,
) -> String {
    let mut s = format!(
        "{function} {class}: {} ({} trials, worst margin {})",
        if v.holds { "holds" } else { "fails" },
        v.trials,
        sci(v.worst_margin)
    );
    if claim != ClaimStatus::Unknown {
        s.push_str(&format!(" [catalog: {claim:?}]"));
    }
    if disagreement {
        s.push_str(" DISAGREES WITH CATALOG");
    }
    if let Some(w) = &v.witness {
        s.push_str(&format!("\n    witness trial {} seed {} v {}", w.trial, w.seed, opt(w.v)));
        s.push_str(&format!("\n    A = {:?}\n    B = {:?}", w.a.to_rows(), w.b.to_rows()));
    }
    s
}
