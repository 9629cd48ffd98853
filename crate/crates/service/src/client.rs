//! Blocking client for the `/api/v1` endpoints, used by the CLI.

use reqwest::blocking::{Client as Http, RequestBuilder, Response};
use reqwest::Method;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("cannot reach {url}: {message}")]
    Transport { url: String, message: String },
    #[error("{status} {code}: {message}")]
    Api {
        status: u16,
        code: String,
        message: String,
        body: Value,
    },
    #[error("unexpected response: {0}")]
    Decode(String),
}

impl ClientError {
    pub fn code(&self) -> Option<&str> {
        match self {
            ClientError::Api { code, .. } => Some(code),
            _ => None,
        }
    }

    pub fn status(&self) -> Option<u16> {
        match self {
            ClientError::Api { status, .. } => Some(*status),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, ClientError>;

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    token: Option<String>,
    http: Http,
}

impl Client {
    /// `base` is the server root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base: &str, token: Option<String>) -> Self {
        Self {
            base: format!("{}/api/v1", base.trim_end_matches('/')),
            token,
            http: Http::new(),
        }
    }

    pub fn with_token(&self, token: impl Into<String>) -> Self {
        Self {
            token: Some(token.into()),
            ..self.clone()
        }
    }

    fn request(&self, method: Method, path: &str) -> RequestBuilder {
        let b = self.http.request(method, format!("{}{path}", self.base));
        match &self.token {
            Some(t) => b.bearer_auth(t),
            None => b,
        }
    }

    fn send(&self, b: RequestBuilder) -> Result<Response> {
        let r = b.send().map_err(|e| ClientError::Transport {
            url: self.base.clone(),
            message: e.to_string(),
        })?;
        if r.status().is_success() {
            return Ok(r);
        }
        let status = r.status().as_u16();
        let body: Value = r.json().unwrap_or(Value::Null);
        let err = &body["error"];
        Err(ClientError::Api {
            status,
            code: err["code"].as_str().unwrap_or("UNKNOWN").to_string(),
            message: err["message"].as_str().unwrap_or("").to_string(),
            body,
        })
    }

    fn json<T: DeserializeOwned>(&self, b: RequestBuilder) -> Result<T> {
        self.send(b)?.json().map_err(|e| ClientError::Decode(e.to_string()))
    }

    pub fn get<T: DeserializeOwned>(&self, path: &str) -> Result<T> {
        self.json(self.request(Method::GET, path))
    }

    pub fn get_text(&self, path: &str) -> Result<String> {
        self.send(self.request(Method::GET, path))?
            .text()
            .map_err(|e| ClientError::Decode(e.to_string()))
    }

    pub fn post<T: DeserializeOwned>(&self, path: &str, body: &impl Serialize) -> Result<T> {
        self.json(self.request(Method::POST, path).json(body))
    }

    /// POST with a raw body, e.g. an actuals CSV.
    pub fn post_bytes<T: DeserializeOwned>(&self, path: &str, content_type: &str, body: Vec<u8>) -> Result<T> {
        self.json(self.request(Method::POST, path).header("content-type", content_type).body(body))
    }

    pub fn put<T: DeserializeOwned>(&self, path: &str, body: &impl Serialize) -> Result<T> {
        self.json(self.request(Method::PUT, path).json(body))
    }

    pub fn delete<T: DeserializeOwned>(&self, path: &str) -> Result<T> {
        self.json(self.request(Method::DELETE, path))
    }

    /// Sends an arbitrary request and returns the status and raw body,
    /// without turning error statuses into errors.
    pub fn raw(&self, method: Method, path: &str, body: Option<&Value>) -> Result<(u16, String)> {
        let mut b = self.request(method, path);
        if let Some(v) = body {
            b = b.json(v);
        }
        let r = b.send().map_err(|e| ClientError::Transport {
            url: self.base.clone(),
            message: e.to_string(),
        })?;
        let status = r.status().as_u16();
        Ok((status, r.text().unwrap_or_default()))
    }
}
