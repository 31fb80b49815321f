use std::path::PathBuf;
use std::process::ExitCode;

use chatguard::chatbot::read_messages;
use chatguard::config::Config;
use chatguard::harness::{
    chat_loop, run_test, BenchReport, ChatClient, Expectation, Stack, StackConfig, TestOptions,
};
use chatguard::monitor::Level;
use clap::{Parser, Subcommand};

const DEFAULT_CHATBOT: &str = "http://127.0.0.1:8081";

#[derive(Parser)]
#[command(
    name = "chatguard",
    version,
    about = "Runtime-verified chatbot services"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Start the monitor (unless --monitor none) and the chatbot.
    Serve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "real")]
        monitor: Level,
    },
    /// Replay a conversation file and record per-message latencies.
    Test {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 20)]
        iterations: usize,
        #[arg(long, default_value = "real")]
        monitor: Level,
        #[arg(long)]
        out: PathBuf,
        /// Expect false verdicts: any, or comma-separated message indices.
        #[arg(long, num_args = 0..=1, default_missing_value = "any")]
        expect_violations: Option<Expectation>,
        /// Start services from this config instead of connecting to --chatbot.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, env = "CHATGUARD_CHATBOT_URL", default_value = DEFAULT_CHATBOT)]
        chatbot: String,
    },
    /// Interactive chat on standard input.
    Chat {
        #[arg(long)]
        monitor: Option<Level>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, env = "CHATGUARD_CHATBOT_URL", default_value = DEFAULT_CHATBOT)]
        chatbot: String,
    },
    /// Compare CSVs from `test` runs at different monitor levels.
    BenchReport {
        dir: PathBuf,
        /// TSV output, default `<dir>/report.tsv`.
        #[arg(long)]
        tsv: Option<PathBuf>,
    },
}

fn start(config: &PathBuf, level: Level, env: bool) -> Result<Stack, String> {
    let cfg = Config::load(config).map_err(|e| e.to_string())?;
    let mut sc = StackConfig::from_config(&cfg, level).map_err(|e| e.to_string())?;
    if env {
        sc = sc.apply_env();
    } else {
        sc.monitor_listen = "127.0.0.1:0".into();
        sc.chatbot_listen = "127.0.0.1:0".into();
    }
    Stack::start(sc).map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Serve { config, monitor } => {
            let stack = start(&config, monitor, true)?;
            if let Some(url) = stack.monitor_url() {
                println!("monitor ({monitor}) listening on {url}");
            }
            println!("chatbot listening on {}", stack.chatbot_url());
            println!("ready");
            stack.wait_for_ctrl_c();
            stack.stop();
            Ok(ExitCode::SUCCESS)
        }
        Command::Test {
            input,
            iterations,
            monitor,
            out,
            expect_violations,
            config,
            chatbot,
        } => {
            let messages =
                read_messages(&input).map_err(|e| format!("{}: {e}", input.display()))?;
            if messages.is_empty() {
                return Err(format!("{} has no messages", input.display()));
            }
            let stack = config
                .as_ref()
                .map(|c| start(c, monitor, false))
                .transpose()?;
            let client = ChatClient::new(stack.as_ref().map_or(chatbot, Stack::chatbot_url));
            let opts = TestOptions {
                iterations,
                level: monitor,
                out_dir: out,
                expect: expect_violations.unwrap_or_default(),
            };
            let run = run_test(&client, &messages, &opts).map_err(|e| e.to_string())?;
            println!("{run}");
            Ok(if run.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Chat {
            monitor,
            config,
            chatbot,
        } => {
            let stack = config
                .as_ref()
                .map(|c| start(c, monitor.unwrap_or(Level::Real), false))
                .transpose()?;
            let client = ChatClient::new(stack.as_ref().map_or(chatbot, Stack::chatbot_url));
            let stdin = std::io::stdin();
            chat_loop(&client, monitor, stdin.lock(), std::io::stdout())
                .map_err(|e| e.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::BenchReport { dir, tsv } => {
            let report = BenchReport::load(&dir).map_err(|e| e.to_string())?;
            print!("{report}");
            let tsv = tsv.unwrap_or_else(|| dir.join("report.tsv"));
            report.write_tsv(&tsv).map_err(|e| e.to_string())?;
            println!("wrote {}", tsv.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
