use std::path::Path;

use mixedmop::NormalityReport;
use serde::Serialize;
use serde_json::Value;

use crate::artifacts::{write_file, Artifacts};
use crate::Context;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Validation,
    Numerical,
    Internal,
}

/// A failed run: exit status, stable code, message and optional payloads.
#[derive(Debug)]
pub struct Failure {
    kind: Kind,
    code: &'static str,
    message: String,
    normality: Option<Box<NormalityReport>>,
    details: Option<Box<Value>>,
}

impl Failure {
    pub fn validation(message: impl Into<String>) -> Self {
        Failure::new(Kind::Validation, "E_INVALID_INPUT", message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Failure::new(Kind::Internal, "E_INTERNAL", message)
    }

    /// A verification check that ran but missed its threshold.
    pub fn accuracy(message: impl Into<String>, details: Value) -> Self {
        let mut f = Failure::new(Kind::Numerical, "E_ACCURACY", message);
        f.details = Some(Box::new(details));
        f
    }

    fn new(kind: Kind, code: &'static str, message: impl Into<String>) -> Self {
        Failure {
            kind,
            code,
            message: message.into(),
            normality: None,
            details: None,
        }
    }

    pub fn message(&self) -> &str {
        &self.message
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind {
            Kind::Validation => 1,
            Kind::Numerical => 2,
            Kind::Internal => 3,
        }
    }

    /// `CODE: text` on one line.
    pub fn line(&self) -> String {
        format!("{}: {}", self.code, self.message.replace('\n', " "))
    }

    pub fn write_report(&self, out: &Path, ctx: &Context) -> Result<(), Failure> {
        #[derive(Serialize)]
        struct ErrorReport<'a> {
            tool: &'static str,
            version: &'static str,
            command: &'static str,
            exit_code: u8,
            code: &'static str,
            message: &'a str,
            config: &'a Option<Value>,
            normality_report: &'a Option<Box<NormalityReport>>,
            details: &'a Option<Box<Value>>,
        }
        let report = ErrorReport {
            tool: "mixedmop",
            version: mixedmop::VERSION,
            command: ctx.command,
            exit_code: self.exit_code(),
            code: self.code,
            message: &self.message,
            config: &ctx.config,
            normality_report: &self.normality,
            details: &self.details,
        };
        std::fs::create_dir_all(out).map_err(|e| Failure::internal(format!("{}: {e}", out.display())))?;
        let mut body = Artifacts::json_bytes(&report)?;
        body.push(b'\n');
        write_file(&out.join("error_report.json"), &body)
    }
}

impl From<mixedmop::Error> for Failure {
    fn from(e: mixedmop::Error) -> Self {
        let kind = if e.is_numerical() {
            Kind::Numerical
        } else {
            Kind::Validation
        };
        let mut f = Failure::new(kind, e.code(), e.to_string());
        f.normality = e.report().cloned().map(Box::new);
        f
    }
}
