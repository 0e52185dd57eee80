use std::collections::{HashMap, VecDeque};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{LlmError, Result};

/// One prompt/completion pair as stored in transcript files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exchange {
    pub prompt: String,
    pub completion: String,
    /// RFC 3339 timestamp.
    pub time: String,
}

impl Exchange {
    pub fn now(prompt: &str, completion: &str) -> Self {
        Exchange {
            prompt: prompt.to_string(),
            completion: completion.to_string(),
            time: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
        }
    }
}

pub fn read_jsonl<R: Read>(source: R) -> Result<Vec<Exchange>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(source).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let ex: Exchange = serde_json::from_str(&line).map_err(|e| LlmError::Transcript {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(ex);
    }
    Ok(out)
}

pub fn write_jsonl<W: Write>(exchanges: &[Exchange], mut sink: W) -> Result<()> {
    for ex in exchanges {
        serde_json::to_writer(&mut sink, ex)?;
        sink.write_all(b"\n")?;
    }
    Ok(())
}

pub trait LlmBackend {
    fn send(&mut self, prompt: &str, temperature: f64) -> Result<String>;
}

/// Answers from a recorded transcript. A prompt recorded several times is
/// answered in recording order, repeating the last answer once exhausted.
#[derive(Debug, Clone, Default)]
pub struct ReplayBackend {
    answers: HashMap<String, VecDeque<String>>,
    fallback: Option<String>,
}

impl ReplayBackend {
    pub fn new(exchanges: &[Exchange]) -> Self {
        let mut answers: HashMap<String, VecDeque<String>> = HashMap::new();
        for ex in exchanges {
            answers.entry(ex.prompt.clone()).or_default().push_back(ex.completion.clone());
        }
        ReplayBackend {
            answers,
            fallback: None,
        }
    }

    pub fn from_reader<R: Read>(source: R) -> Result<Self> {
        Ok(Self::new(&read_jsonl(source)?))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_reader(File::open(path)?)
    }

    /// Answers unrecorded prompts with `completion` instead of failing.
    pub fn with_fallback(mut self, completion: impl Into<String>) -> Self {
        self.fallback = Some(completion.into());
        self
    }
}

impl LlmBackend for ReplayBackend {
    fn send(&mut self, prompt: &str, _temperature: f64) -> Result<String> {
        match self.answers.get_mut(prompt) {
            Some(queue) if queue.len() > 1 => Ok(queue.pop_front().unwrap()),
            Some(queue) => Ok(queue.front().cloned().unwrap_or_default()),
            None => self
                .fallback
                .clone()
                .ok_or_else(|| LlmError::UnknownPrompt(prompt.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpConfig {
    pub url: String,
    pub model: String,
    /// Name of the environment variable holding the bearer token.
    pub api_key_env: String,
    pub timeout_secs: u64,
    pub max_retries: u32,
    /// Every exchange is appended here as one JSON line.
    pub transcript: Option<PathBuf>,
}

impl Default for HttpConfig {
    fn default() -> Self {
        HttpConfig {
            url: "https://api.openai.com/v1/chat/completions".into(),
            model: "gpt-4".into(),
            api_key_env: "OPENAI_API_KEY".into(),
            timeout_secs: 120,
            max_retries: 3,
            transcript: None,
        }
    }
}

/// Chat-completion endpoint over blocking HTTP.
pub struct HttpBackend {
    config: HttpConfig,
    client: reqwest::blocking::Client,
    api_key: Option<String>,
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<ChatMessage<'a>>,
    temperature: f64,
}

impl HttpBackend {
    pub fn new(config: HttpConfig) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| LlmError::Backend(e.to_string()))?;
        let api_key = std::env::var(&config.api_key_env).ok();
        Ok(HttpBackend {
            config,
            client,
            api_key,
        })
    }

    fn record(&self, prompt: &str, completion: &str) -> Result<()> {
        if let Some(path) = &self.config.transcript {
            let file = OpenOptions::new().create(true).append(true).open(path)?;
            write_jsonl(&[Exchange::now(prompt, completion)], file)?;
        }
        Ok(())
    }

    fn post_once(&self, body: &ChatRequest<'_>) -> std::result::Result<String, (bool, String)> {
        let mut req = self.client.post(&self.config.url).json(body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| (e.is_timeout() || e.is_connect(), e.to_string()))?;
        let status = resp.status();
        if status.as_u16() == 429 || status.is_server_error() {
            return Err((true, format!("HTTP {status}")));
        }
        if !status.is_success() {
            let text = resp.text().unwrap_or_default();
            return Err((false, format!("HTTP {status}: {text}")));
        }
        let value: serde_json::Value = resp.json().map_err(|e| (false, e.to_string()))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| (false, "response has no choices[0].message.content".to_string()))
    }
}

impl LlmBackend for HttpBackend {
    fn send(&mut self, prompt: &str, temperature: f64) -> Result<String> {
        let body = ChatRequest {
            model: &self.config.model,
            messages: vec![ChatMessage {
                role: "user",
                content: prompt,
            }],
            temperature,
        };
        let mut attempt = 0;
        loop {
            match self.post_once(&body) {
                Ok(text) => {
                    self.record(prompt, &text)?;
                    return Ok(text);
                }
                Err((retryable, msg)) if retryable && attempt < self.config.max_retries => {
                    let wait = Duration::from_millis(500 * 2u64.pow(attempt));
                    log::warn!("llm request failed ({msg}), retrying in {wait:?}");
                    std::thread::sleep(wait);
                    attempt += 1;
                }
                Err((_, msg)) => return Err(LlmError::Backend(msg)),
            }
        }
    }
}
