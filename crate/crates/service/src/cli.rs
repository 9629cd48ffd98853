//! Operator command line. Everything except `serve` and `audit verify
//! --store` talks to a running service over HTTP.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use govsheet_core::template::TemplateDocument;
use govsheet_core::Role;
use serde_json::{json, Value};

use crate::client::{Client, ClientError};
use crate::config::Config;

#[derive(Debug, Parser)]
#[command(name = "govsheet", version, about = "Budget governance service and operator tool")]
pub struct Cli {
    /// Service root URL.
    #[arg(long, global = true, env = "GOVSHEET_URL", default_value = "http://127.0.0.1:8080")]
    pub url: String,
    /// Bearer token.
    #[arg(long, global = true, env = "GOVSHEET_TOKEN", hide_env_values = true)]
    pub token: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    #[command(subcommand)]
    User(UserCmd),
    #[command(subcommand)]
    Round(RoundCmd),
    #[command(subcommand)]
    Template(TemplateCmd),
    #[command(subcommand)]
    Actuals(ActualsCmd),
    #[command(subcommand)]
    Audit(AuditCmd),
    #[command(subcommand)]
    Status(StatusCmd),
    #[command(subcommand)]
    Demo(DemoCmd),
}

#[derive(Debug, Subcommand)]
pub enum UserCmd {
    List,
    Add {
        id: String,
        #[arg(long)]
        name: Option<String>,
    },
    /// Grant a role, scoped to the given departments or to all of them.
    Grant {
        id: String,
        role: String,
        #[arg(long = "dept")]
        departments: Vec<String>,
    },
    Revoke { grant_id: u64 },
    /// Mint a bearer token for a principal.
    Token {
        id: String,
        #[arg(long, default_value_t = 86_400)]
        ttl_seconds: i64,
    },
}

#[derive(Debug, Subcommand)]
pub enum RoundCmd {
    List,
    Open { label: String },
    Seed {
        id: u64,
        #[arg(long)]
        template: u64,
        #[arg(long)]
        copy_from: Option<u64>,
    },
    Submit { id: u64 },
    Advance { id: u64 },
    Approve { id: u64 },
    Close { id: u64 },
}

#[derive(Debug, Subcommand)]
pub enum TemplateCmd {
    List,
    /// Create a template from a JSON document file.
    Import {
        file: PathBuf,
        #[arg(long)]
        name: String,
    },
    Submit { version_id: u64 },
    Audit {
        version_id: u64,
        /// `pass` or `refer`.
        verdict: String,
        #[arg(long, default_value = "")]
        note: String,
    },
    Release { version_id: u64 },
}

#[derive(Debug, Subcommand)]
pub enum ActualsCmd {
    Import {
        file: PathBuf,
        #[arg(long)]
        fiscal: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum AuditCmd {
    /// Check the hash chain, on the server or in a store file.
    Verify {
        #[arg(long)]
        store: Option<PathBuf>,
    },
    Export,
}

#[derive(Debug, Subcommand)]
pub enum StatusCmd {
    /// Print the completion matrix as CSV.
    Matrix {
        #[arg(long)]
        round: u64,
        #[arg(long)]
        version: Option<u32>,
    },
}

#[derive(Debug, Subcommand)]
pub enum DemoCmd {
    /// Create the demonstration world; needs an administrator token.
    Seed,
}

/// Exit codes for failed API calls.
pub fn exit_code(e: &ClientError) -> u8 {
    match e.status() {
        Some(401) => 3,
        Some(403) => 4,
        Some(404) => 5,
        Some(409) => 6,
        Some(400 | 422) => 7,
        _ => 1,
    }
}

fn report(e: &ClientError) -> ExitCode {
    match e {
        ClientError::Api { body, .. } => {
            eprintln!("error: {e}");
            let detail = &body["error"];
            if let Some(line) = detail["line"].as_u64() {
                eprintln!("row {line}");
            }
            if let Some(reason) = detail["reason"].as_str() {
                eprintln!("reason: {reason}");
            }
        }
        _ => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(e))
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("values serialize"));
}

fn fail(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(1)
}

pub fn run(cli: Cli) -> ExitCode {
    let client = Client::new(&cli.url, cli.token.clone());
    let result = match cli.command {
        Command::Serve { config } => return serve(config),
        Command::Audit(AuditCmd::Verify { store: Some(path) }) => return verify_store(&path),
        Command::User(c) => user(&client, c),
        Command::Round(c) => round(&client, c),
        Command::Template(c) => match template(&client, c) {
            Ok(v) => Ok(v),
            Err(Outcome::Local(m)) => return fail(m),
            Err(Outcome::Remote(e)) => Err(e),
        },
        Command::Actuals(ActualsCmd::Import { file, fiscal }) => match std::fs::read(&file) {
            Ok(bytes) => client.post_bytes::<Value>(&format!("/actuals/import?fiscal={}", encode(&fiscal)), "text/csv", bytes),
            Err(e) => return fail(format!("{}: {e}", file.display())),
        },
        Command::Audit(AuditCmd::Verify { store: None }) => {
            return match client.get::<Value>("/audit/verify") {
                Ok(v) if v["intact"] == json!(true) => {
                    println!("intact");
                    ExitCode::SUCCESS
                }
                Ok(v) => {
                    println!("broken at seq {}", v["first_bad_seq"]);
                    ExitCode::from(2)
                }
                Err(e) => report(&e),
            }
        }
        Command::Audit(AuditCmd::Export) => match client.get_text("/audit/export") {
            Ok(text) => {
                print!("{text}");
                return ExitCode::SUCCESS;
            }
            Err(e) => Err(e),
        },
        Command::Status(StatusCmd::Matrix { round, version }) => {
            let mut path = format!("/status/matrix?format=csv&round={round}");
            if let Some(v) = version {
                path.push_str(&format!("&version={v}"));
            }
            match client.get_text(&path) {
                Ok(csv) => {
                    print!("{csv}");
                    return ExitCode::SUCCESS;
                }
                Err(e) => Err(e),
            }
        }
        Command::Demo(DemoCmd::Seed) => crate::demo::seed(&client).map(|w| {
            json!({"round_id": w.round_id, "template_id": w.template_id, "tokens": w.tokens})
        }),
    };
    match result {
        Ok(v) => {
            print_json(&v);
            ExitCode::SUCCESS
        }
        Err(e) => report(&e),
    }
}

/// Percent-encodes a query value.
fn encode(s: &str) -> String {
    s.bytes()
        .map(|b| match b {
            b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'-' | b'_' | b'.' | b'~' => (b as char).to_string(),
            _ => format!("%{b:02X}"),
        })
        .collect()
}

fn user(c: &Client, cmd: UserCmd) -> Result<Value, ClientError> {
    match cmd {
        UserCmd::List => c.get("/registry/users"),
        UserCmd::Add { id, name } => c.post("/registry/users", &json!({"id": id, "display_name": name})),
        UserCmd::Grant { id, role, departments } => {
            let role = Role::parse(&role).map(|r| json!(r)).unwrap_or(json!(role));
            let departments = (!departments.is_empty()).then_some(departments);
            c.post("/grants", &json!({"principal_id": id, "role": role, "departments": departments}))
        }
        UserCmd::Revoke { grant_id } => c.delete(&format!("/grants/{grant_id}")),
        UserCmd::Token { id, ttl_seconds } => c.post("/auth/token", &json!({"principal_id": id, "ttl_seconds": ttl_seconds})),
    }
}

fn round(c: &Client, cmd: RoundCmd) -> Result<Value, ClientError> {
    let empty = json!({});
    match cmd {
        RoundCmd::List => c.get("/rounds"),
        RoundCmd::Open { label } => c.post("/rounds", &json!({"label": label})),
        RoundCmd::Seed { id, template, copy_from } => c.post(
            &format!("/rounds/{id}/seed"),
            &json!({"template_id": template, "copy_from": copy_from}),
        ),
        RoundCmd::Submit { id } => c.post(&format!("/rounds/{id}/submit"), &empty),
        RoundCmd::Advance { id } => c.post(&format!("/rounds/{id}/advance"), &empty),
        RoundCmd::Approve { id } => c.post(&format!("/rounds/{id}/approve"), &empty),
        RoundCmd::Close { id } => c.post(&format!("/rounds/{id}/close"), &empty),
    }
}

enum Outcome {
    Local(String),
    Remote(ClientError),
}

impl From<ClientError> for Outcome {
    fn from(e: ClientError) -> Self {
        Outcome::Remote(e)
    }
}

fn template(c: &Client, cmd: TemplateCmd) -> Result<Value, Outcome> {
    let empty = json!({});
    Ok(match cmd {
        TemplateCmd::List => c.get("/templates")?,
        TemplateCmd::Import { file, name } => {
            let text = std::fs::read_to_string(&file).map_err(|e| Outcome::Local(format!("{}: {e}", file.display())))?;
            let document: TemplateDocument =
                serde_json::from_str(&text).map_err(|e| Outcome::Local(format!("{}: {e}", file.display())))?;
            c.post("/templates", &json!({"name": name, "document": document}))?
        }
        TemplateCmd::Submit { version_id } => c.post(&format!("/versions/{version_id}/submit"), &empty)?,
        TemplateCmd::Audit { version_id, verdict, note } => {
            let verdict = match verdict.to_ascii_lowercase().as_str() {
                "pass" => "Pass",
                "refer" => "Refer",
                other => return Err(Outcome::Local(format!("verdict must be pass or refer, not {other:?}"))),
            };
            c.post(&format!("/versions/{version_id}/audit"), &json!({"verdict": verdict, "note": note}))?
        }
        TemplateCmd::Release { version_id } => c.post(&format!("/versions/{version_id}/release"), &empty)?,
    })
}

fn verify_store(path: &std::path::Path) -> ExitCode {
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) => return fail(format!("{}: {e}", path.display())),
    };
    let verdict = govsheet_core::verify_store_bytes(&bytes);
    match verdict.first_bad_seq {
        None => {
            println!("intact");
            ExitCode::SUCCESS
        }
        Some(seq) => {
            println!("broken at seq {seq}");
            ExitCode::from(2)
        }
    }
}

fn serve(config: Option<PathBuf>) -> ExitCode {
    let cfg = match Config::load(config.as_deref()) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let filter = tracing_subscriber::EnvFilter::try_new(&cfg.log_level)
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info"));
    tracing_subscriber::fmt().with_env_filter(filter).with_writer(std::io::stderr).init();
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    match runtime.block_on(crate::server::run(cfg)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ crate::server::ServeError::StoreCorrupt { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => fail(e),
    }
}
