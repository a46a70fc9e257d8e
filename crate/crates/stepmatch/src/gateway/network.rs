//! Blocking client for OpenAI-style chat-completion endpoints.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{Backend, BackendResponse, CompletionRequest, GatewayError, Usage};

/// Connection settings for a chat-completion endpoint.
#[derive(Debug, Clone)]
pub struct NetworkConfig {
    /// Base URL up to the API root, e.g. `https://api.openai.com/v1`.
    pub base_url: String,
    pub api_key: String,
    pub timeout: Duration,
}

impl NetworkConfig {
    pub fn new(base_url: impl Into<String>, api_key: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            api_key: api_key.into(),
            timeout: Duration::from_secs(120),
        }
    }
}

#[derive(Serialize)]
struct WireMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: Vec<WireMessage<'a>>,
    temperature: f32,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireResponseMessage,
}

#[derive(Deserialize)]
struct WireResponseMessage {
    content: Option<String>,
}

#[derive(Deserialize)]
struct WireUsage {
    prompt_tokens: u64,
    completion_tokens: u64,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
    usage: Option<WireUsage>,
}

pub struct NetworkBackend {
    config: NetworkConfig,
    client: reqwest::blocking::Client,
}

impl NetworkBackend {
    pub fn new(config: NetworkConfig) -> Result<Self, GatewayError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| GatewayError::Unavailable(e.to_string()))?;
        Ok(Self { config, client })
    }

    fn endpoint(&self) -> String {
        format!(
            "{}/chat/completions",
            self.config.base_url.trim_end_matches('/')
        )
    }
}

impl Backend for NetworkBackend {
    fn name(&self) -> &str {
        "network"
    }

    fn complete(&self, request: &CompletionRequest) -> Result<BackendResponse, GatewayError> {
        let body = WireRequest {
            model: &request.model,
            messages: request
                .messages
                .messages()
                .iter()
                .map(|m| WireMessage {
                    role: m.role.as_str(),
                    content: &m.content,
                })
                .collect(),
            temperature: request.temperature,
            max_tokens: request.max_output_tokens,
        };
        let response = self
            .client
            .post(self.endpoint())
            .bearer_auth(&self.config.api_key)
            .json(&body)
            .send()
            .map_err(|e| GatewayError::Unavailable(e.to_string()))?;

        let status = response.status();
        if status.as_u16() == 401 || status.as_u16() == 403 {
            return Err(GatewayError::Auth(format!("endpoint returned {status}")));
        }
        if status.as_u16() == 429 {
            return Err(GatewayError::RateLimited(format!(
                "endpoint returned {status}"
            )));
        }
        if status.is_server_error() {
            return Err(GatewayError::Unavailable(format!(
                "endpoint returned {status}"
            )));
        }
        if !status.is_success() {
            let text = response.text().unwrap_or_default();
            return Err(GatewayError::ResponseMalformed(format!(
                "endpoint returned {status}: {text}"
            )));
        }

        let wire: WireResponse = response
            .json()
            .map_err(|e| GatewayError::ResponseMalformed(e.to_string()))?;
        let text = wire
            .choices
            .first()
            .and_then(|c| c.message.content.clone())
            .ok_or_else(|| {
                GatewayError::ResponseMalformed("response carries no message content".to_string())
            })?;
        let usage = wire
            .usage
            .map(|u| Usage {
                input_tokens: u.prompt_tokens,
                output_tokens: u.completion_tokens,
            })
            .ok_or_else(|| {
                GatewayError::ResponseMalformed("response carries no usage object".to_string())
            })?;
        Ok(BackendResponse { text, usage })
    }
}
