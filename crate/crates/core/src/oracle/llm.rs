//! Membership answers from a language model behind a text-in/text-out
//! endpoint, with the baseline, chain-of-thought, verification and
//! discrimination prompt strategies.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::{LabelSource, QueryCache, QueryLabel};
use crate::prompt::discrimination_word_search;
use crate::word::{Alphabet, Word};

/// Environment variable holding the endpoint credential.
pub const API_KEY_VAR: &str = "LAPR_LLM_API_KEY";

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("transport: {0}")]
    Transport(String),
    #[error("unexpected response: {0}")]
    Response(String),
}

/// One request, one reply.
pub trait TextBackend {
    fn complete(&mut self, prompt: &str) -> Result<String, BackendError>;
}

impl<F: FnMut(&str) -> Result<String, BackendError>> TextBackend for F {
    fn complete(&mut self, prompt: &str) -> Result<String, BackendError> {
        self(prompt)
    }
}

/// Chat-completions style HTTP endpoint. The request carries the prompt as
/// a single user message; the reply text is read from
/// `choices[0].message.content`, or from a top-level `text` field.
pub struct HttpBackend {
    endpoint: String,
    model: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl fmt::Debug for HttpBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HttpBackend")
            .field("endpoint", &self.endpoint)
            .field("model", &self.model)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .finish()
    }
}

impl HttpBackend {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>, api_key: Option<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(120)))
            .build()
            .into();
        HttpBackend { endpoint: endpoint.into(), model: model.into(), api_key, agent }
    }

    /// Reads the credential from [`API_KEY_VAR`] when it is set.
    pub fn from_env(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        HttpBackend::new(endpoint, model, std::env::var(API_KEY_VAR).ok().filter(|k| !k.is_empty()))
    }
}

impl TextBackend for HttpBackend {
    fn complete(&mut self, prompt: &str) -> Result<String, BackendError> {
        let body = serde_json::json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": 0,
        });
        let mut request = self.agent.post(&self.endpoint);
        if let Some(key) = &self.api_key {
            request = request.header("Authorization", format!("Bearer {key}"));
        }
        let mut response = request.send_json(&body).map_err(|e| BackendError::Transport(e.to_string()))?;
        let value: serde_json::Value =
            response.body_mut().read_json().map_err(|e| BackendError::Response(e.to_string()))?;
        value
            .pointer("/choices/0/message/content")
            .or_else(|| value.get("text"))
            .and_then(|v| v.as_str())
            .map(str::to_owned)
            .ok_or_else(|| BackendError::Response("no message content".into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptStrategy {
    Baseline,
    Cot,
    Verification,
    Discrimination,
}

impl PromptStrategy {
    pub const ALL: [PromptStrategy; 4] =
        [PromptStrategy::Baseline, PromptStrategy::Cot, PromptStrategy::Verification, PromptStrategy::Discrimination];

    pub fn name(self) -> &'static str {
        match self {
            PromptStrategy::Baseline => "baseline",
            PromptStrategy::Cot => "cot",
            PromptStrategy::Verification => "verification",
            PromptStrategy::Discrimination => "discrimination",
        }
    }
}

impl fmt::Display for PromptStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PromptStrategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PromptStrategy::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown prompt strategy {s:?} (expected baseline, cot, verification or discrimination)"))
    }
}

/// Prompt texts with `{name}` placeholders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Templates {
    pub baseline: String,
    pub cot: String,
    pub discrimination: String,
    pub teacher: String,
    pub revise: String,
}

impl Default for Templates {
    fn default() -> Self {
        Templates {
            baseline: include_str!("../../templates/baseline.txt").into(),
            cot: include_str!("../../templates/cot.txt").into(),
            discrimination: include_str!("../../templates/discrimination.txt").into(),
            teacher: include_str!("../../templates/teacher.txt").into(),
            revise: include_str!("../../templates/revise.txt").into(),
        }
    }
}

impl Templates {
    /// Reads `<name>.txt` files from `dir`; missing files keep the built-in
    /// text.
    pub fn load_dir(dir: &Path) -> std::io::Result<Self> {
        let mut t = Templates::default();
        for (name, slot) in [
            ("baseline", &mut t.baseline),
            ("cot", &mut t.cot),
            ("discrimination", &mut t.discrimination),
            ("teacher", &mut t.teacher),
            ("revise", &mut t.revise),
        ] {
            let path = dir.join(format!("{name}.txt"));
            if path.exists() {
                *slot = std::fs::read_to_string(path)?;
            }
        }
        Ok(t)
    }
}

/// Replaces each `{key}` by its value. Other braces are left alone.
pub fn render(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = template.to_owned();
    for (key, value) in vars {
        out = out.replace(&format!("{{{key}}}"), value);
    }
    out
}

/// What the prompts say about the language.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageContext {
    pub definition: String,
    pub positive_example: String,
    pub negative_example: String,
}

/// Words shown next to a discrimination query.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Exemplars {
    pub similar_accept: String,
    pub similar_reject: String,
}

/// One request/response pair, as written to the transcript.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub query_word: String,
    pub strategy: String,
    pub prompt: String,
    pub response: String,
    pub parsed_label: QueryLabel,
}

/// The teacher's judgement of an analysis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub matches_definition: bool,
    pub consistent_with_input: bool,
    #[serde(default)]
    pub reasons: String,
    /// `Some(false)` when the final answer contradicts an otherwise sound
    /// analysis.
    #[serde(default)]
    pub answer_follows: Option<bool>,
}

fn label_of_token(token: &str) -> Option<QueryLabel> {
    match token {
        "yes" | "true" | "accept" | "accepted" => Some(QueryLabel::Accept),
        "no" | "false" | "reject" | "rejected" => Some(QueryLabel::Reject),
        "unknown" => Some(QueryLabel::Unknown),
        _ => None,
    }
}

/// Reads a yes/no answer. An `Answer:` line wins; otherwise the last
/// yes/no token of the reply counts.
pub fn parse_answer(text: &str) -> QueryLabel {
    let lower = text.to_lowercase();
    let tokens = |s: &str| -> Vec<QueryLabel> {
        s.split(|c: char| !c.is_ascii_alphabetic()).filter_map(label_of_token).collect()
    };
    for line in lower.lines().rev() {
        if let Some(rest) = line.trim().strip_prefix("answer") {
            if let Some(&l) = tokens(rest).first() {
                return l;
            }
        }
    }
    if let Ok(v) = serde_json::from_str::<serde_json::Value>(lower.trim()) {
        if let Some(l) = v.get("answer").and_then(|a| a.as_str()).and_then(|a| label_of_token(a.trim())) {
            return l;
        }
    }
    tokens(&lower).last().copied().unwrap_or(QueryLabel::Unknown)
}

/// The first JSON object embedded in `text` that parses as a verdict.
pub fn parse_verdict(text: &str) -> Option<Verdict> {
    let start = text.find('{')?;
    let end = text.rfind('}')?;
    if end < start {
        return None;
    }
    serde_json::from_str(&text[start..=end]).ok()
}

fn answer_word(label: QueryLabel) -> &'static str {
    match label {
        QueryLabel::Accept => "yes",
        QueryLabel::Reject => "no",
        QueryLabel::Unknown => "unknown",
    }
}

fn invert(label: QueryLabel) -> QueryLabel {
    match label {
        QueryLabel::Accept => QueryLabel::Reject,
        QueryLabel::Reject => QueryLabel::Accept,
        QueryLabel::Unknown => QueryLabel::Unknown,
    }
}

struct Exchange<'a, B: TextBackend + ?Sized> {
    backend: &'a mut B,
    word: &'a str,
    strategy: PromptStrategy,
    log: Vec<TranscriptEntry>,
}

impl<B: TextBackend + ?Sized> Exchange<'_, B> {
    fn ask(&mut self, prompt: String, parse: impl Fn(&str) -> QueryLabel) -> Option<(String, QueryLabel)> {
        let (response, label) = match self.backend.complete(&prompt) {
            Ok(r) => {
                let l = parse(&r);
                (r, l)
            }
            Err(e) => (format!("<error: {e}>"), QueryLabel::Unknown),
        };
        let ok = !response.starts_with("<error: ");
        self.log.push(TranscriptEntry {
            query_word: self.word.to_owned(),
            strategy: self.strategy.to_string(),
            prompt,
            response: response.clone(),
            parsed_label: label,
        });
        ok.then_some((response, label))
    }
}

/// Asks the backend about `word` under `strategy`. Transport failures and
/// unreadable replies give `Unknown`; every request made is returned for the
/// transcript.
pub fn llm_answer_membership<B: TextBackend + ?Sized>(
    backend: &mut B,
    templates: &Templates,
    strategy: PromptStrategy,
    word: &str,
    context: &LanguageContext,
    exemplars: Option<&Exemplars>,
) -> (QueryLabel, Vec<TranscriptEntry>) {
    let none = Exemplars::default();
    let ex = exemplars.unwrap_or(&none);
    let vars = [
        ("word", word),
        ("definition", context.definition.as_str()),
        ("positive_example", context.positive_example.as_str()),
        ("negative_example", context.negative_example.as_str()),
        ("similar_accept", ex.similar_accept.as_str()),
        ("similar_reject", ex.similar_reject.as_str()),
    ];
    let mut x = Exchange { backend, word, strategy, log: Vec::new() };
    let label = match strategy {
        PromptStrategy::Baseline => x.ask(render(&templates.baseline, &vars), parse_answer).map(|r| r.1),
        PromptStrategy::Cot => x.ask(render(&templates.cot, &vars), parse_answer).map(|r| r.1),
        PromptStrategy::Discrimination => {
            let template = if exemplars.is_some() { &templates.discrimination } else { &templates.cot };
            x.ask(render(template, &vars), parse_answer).map(|r| r.1)
        }
        PromptStrategy::Verification => verify(&mut x, templates, &vars),
    };
    (label.unwrap_or(QueryLabel::Unknown), x.log)
}

/// Chain-of-thought answer checked by a teacher request. A sound analysis
/// with a contradicting answer is inverted; an unsound one is retried once
/// with the teacher's reasons.
fn verify<B: TextBackend + ?Sized>(
    x: &mut Exchange<'_, B>,
    templates: &Templates,
    vars: &[(&str, &str)],
) -> Option<QueryLabel> {
    let mut prompt = render(&templates.cot, vars);
    for attempt in 0..2 {
        let (analysis, answer) = x.ask(prompt, parse_answer)?;
        let mut teacher_vars = vars.to_vec();
        teacher_vars.push(("analysis", &analysis));
        teacher_vars.push(("answer", answer_word(answer)));
        let (reply, _) = x.ask(render(&templates.teacher, &teacher_vars), |r| {
            parse_verdict(r).map_or(QueryLabel::Unknown, |_| answer)
        })?;
        let reasons = match parse_verdict(&reply) {
            Some(v) if v.matches_definition && v.consistent_with_input => {
                return Some(if v.answer_follows == Some(false) { invert(answer) } else { answer });
            }
            Some(v) => v.reasons,
            None => "The review could not be read; check the word and the definition again.".to_owned(),
        };
        if attempt == 1 {
            break;
        }
        let mut revise_vars = vars.to_vec();
        revise_vars.push(("reasons", &reasons));
        prompt = render(&templates.revise, &revise_vars);
    }
    None
}

/// Label source backed by a language model. Answers are cached by the
/// teacher; this type only renders prompts, calls the backend and keeps the
/// transcript.
pub struct LlmOracle<B: TextBackend> {
    backend: B,
    templates: Templates,
    strategy: PromptStrategy,
    context: LanguageContext,
    alphabet: Alphabet,
    transcript: Option<Box<dyn Write + Send>>,
}

impl<B: TextBackend> LlmOracle<B> {
    pub fn new(backend: B, strategy: PromptStrategy, context: LanguageContext, alphabet: Alphabet) -> Self {
        LlmOracle { backend, templates: Templates::default(), strategy, context, alphabet, transcript: None }
    }

    pub fn with_templates(mut self, templates: Templates) -> Self {
        self.templates = templates;
        self
    }

    /// Appends one JSON object per request to `out`.
    pub fn with_transcript(mut self, out: Box<dyn Write + Send>) -> Self {
        self.transcript = Some(out);
        self
    }

    fn exemplars(&self, word: &Word, history: &QueryCache) -> Option<Exemplars> {
        let pair = discrimination_word_search(history, &self.alphabet, word).ok()?;
        let w_s = pair.w_s?;
        let (accept, reject) = match (history.label(&pair.w_q)?, history.label(&w_s)?) {
            (true, false) => (pair.w_q, w_s),
            (false, true) => (w_s, pair.w_q),
            _ => return None,
        };
        Some(Exemplars {
            similar_accept: self.alphabet.format_word(&accept),
            similar_reject: self.alphabet.format_word(&reject),
        })
    }
}

impl<B: TextBackend> LabelSource for LlmOracle<B> {
    fn label(&mut self, word: &Word, history: &QueryCache) -> QueryLabel {
        let exemplars = match self.strategy {
            PromptStrategy::Discrimination => self.exemplars(word, history),
            _ => None,
        };
        let text = self.alphabet.format_word(word);
        let (label, log) = llm_answer_membership(
            &mut self.backend,
            &self.templates,
            self.strategy,
            &text,
            &self.context,
            exemplars.as_ref(),
        );
        if let Some(out) = self.transcript.as_mut() {
            for entry in &log {
                let line = serde_json::to_string(entry).expect("transcript entries serialize");
                let _ = writeln!(out, "{line}");
            }
            let _ = out.flush();
        }
        label
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn context() -> LanguageContext {
        LanguageContext {
            definition: "words that start with a".into(),
            positive_example: "ab: starts with a".into(),
            negative_example: "ba: starts with b".into(),
        }
    }

    /// Replies from a fixed script, one per request.
    fn scripted(replies: Vec<&'static str>) -> impl FnMut(&str) -> Result<String, BackendError> {
        let mut it = replies.into_iter();
        move |_: &str| it.next().map(str::to_owned).ok_or_else(|| BackendError::Transport("script exhausted".into()))
    }

    #[test]
    fn echo_yes_is_accept() {
        let mut b = |_: &str| Ok::<_, BackendError>("yes".to_owned());
        let (l, log) = llm_answer_membership(&mut b, &Templates::default(), PromptStrategy::Baseline, "ab", &context(), None);
        assert_eq!(l, QueryLabel::Accept);
        assert_eq!(log.len(), 1);
        assert!(log[0].prompt.contains("\"ab\"") && log[0].prompt.contains("start with a"));
    }

    #[test]
    fn answer_parsing() {
        assert_eq!(parse_answer("No."), QueryLabel::Reject);
        assert_eq!(parse_answer("the first symbol is a, so yes\nAnswer: no"), QueryLabel::Reject);
        assert_eq!(parse_answer("{\"answer\": \"yes\"}"), QueryLabel::Accept);
        assert_eq!(parse_answer("I cannot tell"), QueryLabel::Unknown);
        assert_eq!(parse_answer("yes, wait, no"), QueryLabel::Reject);
    }

    #[test]
    fn sound_analysis_with_wrong_answer_is_inverted() {
        let mut b = scripted(vec![
            "It starts with a.\nAnswer: no",
            r#"{"matches_definition": true, "consistent_with_input": true, "answer_follows": false, "reasons": "analysis says a"}"#,
        ]);
        let (l, log) = llm_answer_membership(&mut b, &Templates::default(), PromptStrategy::Verification, "ab", &context(), None);
        assert_eq!(l, QueryLabel::Accept);
        assert_eq!(log.len(), 2);
    }

    #[test]
    fn accepted_analysis_keeps_its_answer() {
        let mut b = scripted(vec![
            "Answer: yes",
            r#"{"matches_definition": true, "consistent_with_input": true, "reasons": "fine"}"#,
        ]);
        let (l, _) = llm_answer_membership(&mut b, &Templates::default(), PromptStrategy::Verification, "ab", &context(), None);
        assert_eq!(l, QueryLabel::Accept);
    }

    #[test]
    fn unsound_analysis_is_revised_once() {
        let mut b = scripted(vec![
            "The word bb starts with b.\nAnswer: no",
            r#"{"matches_definition": true, "consistent_with_input": false, "reasons": "the word is ab, not bb"}"#,
            "The word ab starts with a.\nAnswer: yes",
            r#"{"matches_definition": true, "consistent_with_input": true, "reasons": "ok"}"#,
        ]);
        let (l, log) = llm_answer_membership(&mut b, &Templates::default(), PromptStrategy::Verification, "ab", &context(), None);
        assert_eq!(l, QueryLabel::Accept);
        assert_eq!(log.len(), 4);
        assert!(log[2].prompt.contains("the word is ab, not bb"));
    }

    #[test]
    fn malformed_verdicts_give_unknown() {
        let mut b = scripted(vec!["Answer: yes", "{not json", "Answer: yes", "still not json"]);
        let (l, log) = llm_answer_membership(&mut b, &Templates::default(), PromptStrategy::Verification, "ab", &context(), None);
        assert_eq!(l, QueryLabel::Unknown);
        assert_eq!(log.len(), 4);
    }

    #[test]
    fn transport_failure_is_unknown_and_logged() {
        let mut b = |_: &str| Err::<String, _>(BackendError::Transport("refused".into()));
        let (l, log) = llm_answer_membership(&mut b, &Templates::default(), PromptStrategy::Cot, "ab", &context(), None);
        assert_eq!(l, QueryLabel::Unknown);
        assert!(log[0].response.contains("refused"));
    }

    #[test]
    fn render_leaves_unknown_braces() {
        let t = "{\"k\": {word}} over {a, b}";
        assert_eq!(render(t, &[("word", "ab")]), "{\"k\": ab} over {a, b}");
    }

    #[test]
    fn built_in_templates_use_every_placeholder_they_need() {
        let t = Templates::default();
        for body in [&t.baseline, &t.cot, &t.discrimination, &t.revise] {
            assert!(body.contains("{word}") && body.contains("{definition}"));
        }
        assert!(t.discrimination.contains("{similar_accept}") && t.discrimination.contains("{similar_reject}"));
        assert!(t.teacher.contains("{analysis}") && t.revise.contains("{reasons}"));
    }

    #[test]
    fn template_dir_overrides_single_files() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("cot.txt"), "custom {word}").unwrap();
        let t = Templates::load_dir(dir.path()).unwrap();
        assert_eq!(t.cot, "custom {word}");
        assert_eq!(t.baseline, Templates::default().baseline);
    }

    #[test]
    fn debug_output_hides_the_key() {
        let b = HttpBackend::new("http://localhost:1", "m", Some("secret-key".into()));
        assert!(!format!("{b:?}").contains("secret-key"));
    }
}
