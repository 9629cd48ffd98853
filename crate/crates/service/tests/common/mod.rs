#![allow(dead_code)]

use std::io::Read;
use std::net::{SocketAddr, TcpListener};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::sync::Arc;
use std::time::{Duration, Instant};

use govsheet::client::Client;
use govsheet::server;
use govsheet_core::{Engine, ManualClock, PrincipalId, SharedEngine};

pub const ADMIN_TOKEN: &str = "test-admin-secret";

/// An API server on an ephemeral port, running on its own thread until
/// dropped.
pub struct InProcess {
    pub url: String,
    pub engine: SharedEngine,
    stop: Option<tokio::sync::oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<()>>,
}

impl InProcess {
    pub fn start() -> Self {
        let mut e = Engine::in_memory(Arc::new(ManualClock::default()));
        e.bootstrap_admin(&PrincipalId::new("admin")).unwrap();
        Self::with_engine(e)
    }

    pub fn with_engine(engine: Engine) -> Self {
        let engine = SharedEngine::new(engine);
        let shared = engine.clone();
        let (stop, stopped) = tokio::sync::oneshot::channel::<()>();
        let (ready_tx, ready_rx) = std::sync::mpsc::channel();
        let thread = std::thread::spawn(move || {
            let rt = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build().unwrap();
            rt.block_on(async move {
                let listener = server::bind(SocketAddr::from(([127, 0, 0, 1], 0))).await.unwrap();
                ready_tx.send(listener.local_addr().unwrap()).unwrap();
                server::serve_on(listener, shared, Some(ADMIN_TOKEN.into()), async {
                    let _ = stopped.await;
                })
                .await
                .unwrap();
            });
        });
        let addr = ready_rx.recv().unwrap();
        Self {
            url: format!("http://{addr}"),
            engine,
            stop: Some(stop),
            thread: Some(thread),
        }
    }

    pub fn admin(&self) -> Client {
        Client::new(&self.url, Some(ADMIN_TOKEN.into()))
    }

    pub fn anonymous(&self) -> Client {
        Client::new(&self.url, None)
    }
}

impl Drop for InProcess {
    fn drop(&mut self) {
        if let Some(s) = self.stop.take() {
            let _ = s.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

pub fn free_port() -> u16 {
    TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_govsheet")
}

/// Runs the CLI to completion: (exit code, stdout, stderr).
pub fn cli(url: &str, token: Option<&str>, args: &[&str]) -> (i32, String, String) {
    let mut cmd = Command::new(bin());
    cmd.env_remove("GOVSHEET_TOKEN").env_remove("GOVSHEET_URL").arg("--url").arg(url);
    if let Some(t) = token {
        cmd.arg("--token").arg(t);
    }
    let out = cmd.args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

/// A `govsheet serve` child process over a store file.
pub struct ServeProcess {
    pub child: Child,
    pub url: String,
    pub store: PathBuf,
}

pub fn write_config(dir: &Path, port: u16, store: &Path) -> PathBuf {
    let path = dir.join(format!("govsheet-{port}.conf"));
    std::fs::write(
        &path,
        format!(
            "listen = 127.0.0.1:{port}\nstore = {}\nadmin_token_seed = {ADMIN_TOKEN}\nlog_level = warn\nsync = true\n",
            store.display()
        ),
    )
    .unwrap();
    path
}

impl ServeProcess {
    /// Starts the service and waits until it answers.
    pub fn start(dir: &Path, store: &Path) -> Self {
        let port = free_port();
        let config = write_config(dir, port, store);
        let child = Command::new(bin())
            .args(["serve", "--config"])
            .arg(&config)
            .env_remove("GOVSHEET_STORE")
            .env_remove("GOVSHEET_LISTEN")
            .env_remove("GOVSHEET_ADMIN_TOKEN_SEED")
            .stdout(Stdio::null())
            .stderr(Stdio::piped())
            .spawn()
            .unwrap();
        let mut p = Self {
            child,
            url: format!("http://127.0.0.1:{port}"),
            store: store.to_path_buf(),
        };
        p.wait_ready();
        p
    }

    fn wait_ready(&mut self) {
        let admin = self.admin();
        let deadline = Instant::now() + Duration::from_secs(20);
        while Instant::now() < deadline {
            if let Some(status) = self.child.try_wait().unwrap() {
                let mut err = String::new();
                self.child.stderr.take().unwrap().read_to_string(&mut err).unwrap();
                panic!("server exited early with {status}: {err}");
            }
            if admin.get::<serde_json::Value>("/audit/verify").is_ok() {
                return;
            }
            std::thread::sleep(Duration::from_millis(25));
        }
        panic!("server did not become ready");
    }

    pub fn admin(&self) -> Client {
        Client::new(&self.url, Some(ADMIN_TOKEN.into()))
    }

    /// SIGKILL, no chance to flush or shut down.
    pub fn kill(mut self) {
        self.child.kill().unwrap();
        self.child.wait().unwrap();
    }
}

impl Drop for ServeProcess {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// The demo world seeded in-process, served over HTTP.
pub fn demo_server() -> (InProcess, Arc<ManualClock>, govsheet_core::demo::DemoSeed) {
    let clock = Arc::new(ManualClock::default());
    let mut e = Engine::in_memory(clock.clone());
    let admin = PrincipalId::new("admin");
    e.bootstrap_admin(&admin).unwrap();
    let seed = govsheet_core::demo::seed(&mut e, &admin).unwrap();
    (InProcess::with_engine(e), clock, seed)
}

/// A client authenticated as `principal`, using a token minted by the admin.
pub fn as_principal(server: &InProcess, principal: &str) -> Client {
    let t: govsheet_core::MintedToken = server
        .admin()
        .post("/auth/token", &serde_json::json!({"principal_id": principal}))
        .unwrap();
    server.admin().with_token(t.token)
}
