use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use promodel::orchestrator::{Conversation, Status};
use promodel::powl::from_json;
use serde_json::Value;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn replay(name: &str) -> PathBuf {
    root().join("replay").join(name)
}

fn model(name: &str) -> PathBuf {
    root().join("models").join(name)
}

fn promodel(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_promodel"))
        .args(args)
        .env_remove("PROMODEL_PROVIDER_KIND")
        .env_remove("PROMODEL_PROVIDER_REPLAY_DIR")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr_lines(o: &Output) -> Vec<Value> {
    String::from_utf8(o.stderr.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap_or_else(|e| panic!("{l}: {e}")))
        .collect()
}

fn p(path: &std::path::Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn generate_online_shop_to_bpmn() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("shop.bpmn");
    let desc = replay("online_shop").join("description.txt");
    let o = promodel(
        &["generate", "--description", p(&desc), "--out", p(&out), "--format", "bpmn", "--replay-dir", p(&replay("online_shop"))],
        "",
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let xml = std::fs::read_to_string(&out).unwrap();
    let doc = roxmltree::Document::parse(&xml).unwrap();
    assert!(doc.descendants().any(|n| n.tag_name().name() == "sequenceFlow"));
    for d in stderr_lines(&o) {
        assert!(d["category"].is_string());
    }
}

#[test]
fn generate_reads_stdin_and_writes_stdout() {
    let desc = std::fs::read_to_string(replay("online_shop").join("description.txt")).unwrap();
    let o = promodel(&["generate", "--description", "-", "--replay-dir", p(&replay("online_shop"))], &desc);
    assert_eq!(code(&o), 0);
    assert!(from_json(&stdout(&o)).is_ok());
}

#[test]
fn generate_usage_errors() {
    let o = promodel(&["generate", "--description", "/no/such/file.txt", "--replay-dir", p(&replay("online_shop"))], "");
    assert_eq!(code(&o), 2);
    assert!(stderr_lines(&o)[0]["error"].is_string());
    assert_eq!(code(&promodel(&["generate"], "")), 2);
    assert_eq!(code(&promodel(&["generate", "--description", "a.txt", "inline text"], "")), 2);
    assert_eq!(code(&promodel(&["frobnicate"], "")), 2);
    assert_eq!(code(&promodel(&["--help"], "")), 0);
}

#[test]
fn generate_always_critical_fails() {
    let desc = replay("always_critical").join("description.txt");
    let o = promodel(&["generate", "--description", p(&desc), "--replay-dir", p(&replay("always_critical"))], "");
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).is_empty());
    let lines = stderr_lines(&o);
    let diags: Vec<&Value> = lines.iter().filter(|l| l["category"].is_string()).collect();
    assert_eq!(diags.len(), 6);
    assert!(diags.iter().all(|d| d["category"] == "Critical"));
    assert_eq!(diags.last().unwrap()["attempt"], 6);
}

#[test]
fn max_critical_flag_shortens_the_loop() {
    let desc = replay("always_critical").join("description.txt");
    let o = promodel(
        &["generate", "--description", p(&desc), "--replay-dir", p(&replay("always_critical")), "--max-critical", "2"],
        "",
    );
    assert_eq!(code(&o), 3);
    assert_eq!(stderr_lines(&o).iter().filter(|l| l["category"].is_string()).count(), 3);
}

#[test]
fn chat_with_two_feedback_lines_saves_three_versions() {
    let dir = tempfile::tempdir().unwrap();
    let session = dir.path().join("hotel.session.json");
    let desc = replay("hotel").join("description.txt");
    let feedback = std::fs::read_to_string(replay("hotel").join("feedback.txt")).unwrap();
    let o = promodel(
        &["chat", "--description", p(&desc), "--session", p(&session), "--replay-dir", p(&replay("hotel"))],
        &format!("{}\n", feedback.trim_end()),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summaries: Vec<Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(summaries.len(), 3);
    assert_eq!(summaries[2]["version"], 3);
    let conv: Conversation = serde_json::from_str(&std::fs::read_to_string(&session).unwrap()).unwrap();
    assert_eq!(conv.versions.len(), 3);
    assert!(conv.versions[1].model.activity_labels().contains(&"prepare food"));
}

#[test]
fn chat_stops_at_an_empty_line() {
    let dir = tempfile::tempdir().unwrap();
    let session = dir.path().join("s.json");
    let desc = replay("hotel").join("description.txt");
    let o = promodel(
        &["chat", "--description", p(&desc), "--session", p(&session), "--replay-dir", p(&replay("hotel"))],
        "\nInclude an activity \"prepare food\".\n",
    );
    assert_eq!(code(&o), 0);
    let conv: Conversation = serde_json::from_str(&std::fs::read_to_string(&session).unwrap()).unwrap();
    assert_eq!(conv.versions.len(), 1);
}

#[test]
fn chat_keeps_the_last_good_version_when_a_turn_fails() {
    let dir = tempfile::tempdir().unwrap();
    let responses = dir.path().join("responses");
    std::fs::create_dir(&responses).unwrap();
    std::fs::copy(replay("hotel").join("01.txt"), responses.join("01.txt")).unwrap();
    let session = dir.path().join("s.json");
    let desc = replay("hotel").join("description.txt");
    let o = promodel(
        &["chat", "--description", p(&desc), "--session", p(&session), "--replay-dir", p(&responses)],
        "Add a step.\nAdd another step.\n",
    );
    assert_eq!(code(&o), 0);
    let summaries: Vec<Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(summaries.len(), 3);
    assert_eq!(summaries[1]["failure"], "Provider");
    assert_eq!(summaries[2]["version"], 1);
    let conv: Conversation = serde_json::from_str(&std::fs::read_to_string(&session).unwrap()).unwrap();
    assert_eq!(conv.versions.len(), 1);
    assert_eq!(conv.status, Status::Succeeded);
}

#[test]
fn chat_resumes_a_saved_session() {
    let dir = tempfile::tempdir().unwrap();
    let session = dir.path().join("s.json");
    let desc = replay("hotel").join("description.txt");
    let hotel = replay("hotel");
    let args = ["chat", "--description", p(&desc), "--session", p(&session), "--replay-dir", p(&hotel)];
    assert_eq!(code(&promodel(&args, "")), 0);
    let empty = dir.path().join("none");
    std::fs::create_dir(&empty).unwrap();
    let o = promodel(&["chat", "--description", p(&desc), "--session", p(&session), "--replay-dir", p(&empty)], "");
    assert_eq!(code(&o), 0);
    let first: Value = serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap();
    assert_eq!(first["version"], 1);
}

#[test]
fn soundness_of_listing2() {
    let o = promodel(&["soundness", "--in", p(&model("listing2.powl.json"))], "");
    assert_eq!(code(&o), 0);
    let report: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(report["sound"], true);
}

#[test]
fn validate_reports_cycles() {
    let o = promodel(&["validate", "--in", p(&model("cyclic.powl.json"))], "");
    assert_ne!(code(&o), 0);
    assert_eq!(code(&o), 4);
    assert!(stdout(&o).contains("CycleInPartialOrder"));
    let o = promodel(&["validate", "--in", p(&model("listing2.powl.json"))], "");
    assert_eq!(code(&o), 0);
    assert_eq!(code(&promodel(&["soundness", "--in", p(&model("cyclic.powl.json"))], "")), 4);
}

#[test]
fn language_of_xor() {
    let o = promodel(&["language", "--in", p(&model("xor_ab.powl.json")), "--max-loop", "1", "--max-len", "3"], "");
    assert_eq!(code(&o), 0);
    let traces: Vec<Vec<String>> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(traces, vec![vec!["a".to_string()], vec!["b".to_string()]]);
}

#[test]
fn convert_formats() {
    for format in ["pnml", "bpmn", "powl-json"] {
        let o = promodel(&["convert", "--in", p(&model("listing2.powl.json")), "--format", format], "");
        assert_eq!(code(&o), 0, "{format}");
        if format == "powl-json" {
            assert!(from_json(&stdout(&o)).is_ok());
        } else {
            assert!(roxmltree::Document::parse(&stdout(&o)).is_ok());
        }
    }
    assert_eq!(code(&promodel(&["convert", "--in", p(&model("listing2.powl.json")), "--format", "dot"], "")), 2);
    assert_eq!(code(&promodel(&["convert", "--in", p(&model("cyclic.powl.json")), "--format", "bpmn"], "")), 4);
    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.json");
    std::fs::write(&junk, "{").unwrap();
    assert_eq!(code(&promodel(&["convert", "--in", p(&junk), "--format", "bpmn"], "")), 2);
}

#[test]
fn config_file_selects_the_provider() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("promodel.toml");
    std::fs::write(
        &config,
        format!("[provider]\nkind = \"replay\"\nreplay_dir = {:?}\n\n[loop]\nmax_critical = 1\n", p(&replay("always_critical"))),
    )
    .unwrap();
    let o = promodel(&["--config", p(&config), "generate", "Anything at all."], "");
    assert_eq!(code(&o), 3);
    assert_eq!(stderr_lines(&o).iter().filter(|l| l["category"].is_string()).count(), 2);
    std::fs::write(&config, "[provider\n").unwrap();
    assert_eq!(code(&promodel(&["--config", p(&config), "generate", "x"], "")), 2);
}

fn http(port: u16, request: &str) -> String {
    use std::io::Read;
    let mut s = std::net::TcpStream::connect(("127.0.0.1", port)).unwrap();
    s.set_read_timeout(Some(std::time::Duration::from_secs(20))).unwrap();
    s.write_all(request.as_bytes()).unwrap();
    let mut buf = String::new();
    s.read_to_string(&mut buf).unwrap();
    buf
}

#[test]
fn serve_answers_over_http() {
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("promodel.toml");
    std::fs::write(
        &config,
        format!(
            "[provider]\nkind = \"replay\"\nreplay_dir = {:?}\n\n[listen]\naddress = \"127.0.0.1:{port}\"\n\n[store]\npath = {:?}\n",
            p(&replay("online_shop")),
            p(&dir.path().join("store.jsonl")),
        ),
    )
    .unwrap();
    let mut server = Command::new(env!("CARGO_BIN_EXE_promodel"))
        .args(["--config", p(&config), "serve"])
        .stdout(Stdio::null())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let ready = (0..100).any(|_| {
        std::thread::sleep(std::time::Duration::from_millis(50));
        std::net::TcpStream::connect(("127.0.0.1", port)).is_ok()
    });
    assert!(ready);
    let body = r#"{"description":"Log in, pick items, pay, then deliver."}"#;
    let reply = http(
        port,
        &format!(
            "POST /conversations HTTP/1.1\r\nHost: localhost\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
            body.len()
        ),
    );
    server.kill().unwrap();
    let stderr = {
        use std::io::Read;
        let mut s = String::new();
        server.stderr.take().unwrap().read_to_string(&mut s).unwrap();
        s
    };
    server.wait().unwrap();
    assert!(reply.starts_with("HTTP/1.1 200"), "{reply}");
    assert!(reply.contains("\"status\":\"Succeeded\""));
    assert!(stderr.contains("generated"), "{stderr}");
    assert!(std::fs::read_to_string(dir.path().join("store.jsonl")).unwrap().lines().count() == 1);
}
