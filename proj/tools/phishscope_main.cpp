// phishscope CLI: capture pages, simplify content, build prompts, query a
// chat backend, and score whole manifests. Exit codes: 0 success, 10 load or
// config error, 20 browser/backend error, 30 internal error, 40 evaluation
// aborted (backend failure share above the cutoff).

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "phishscope/crawler.hpp"
#include "phishscope/error.hpp"
#include "phishscope/eval.hpp"
#include "phishscope/html_simplify.hpp"
#include "phishscope/ocr_simplify.hpp"
#include "phishscope/pipeline.hpp"
#include "phishscope/prompt.hpp"
#include "phishscope/snapshot.hpp"
#include "phishscope/token_budget.hpp"
#include "phishscope/verdict.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitLoad = 10;
constexpr int kExitBackend = 20;
constexpr int kExitInternal = 30;
constexpr int kExitAborted = 40;

int exit_code_for(phishscope::Errc code) {
  using phishscope::Errc;
  switch (code) {
    case Errc::not_found:
    case Errc::malformed_snapshot:
    case Errc::duplicate_id:
    case Errc::malformed_manifest:
    case Errc::dangling_path:
    case Errc::unparseable_markup:
    case Errc::invalid_config:
      return kExitLoad;
    case Errc::browser_unreachable:
    case Errc::navigation_timeout:
    case Errc::protocol_error:
    case Errc::auth_error:
    case Errc::rate_limited:
    case Errc::server_error:
    case Errc::content_filtered:
    case Errc::missing_fixture:
    case Errc::service_unreachable:
    case Errc::unsupported_image:
    case Errc::quota_exceeded:
      return kExitBackend;
    default:
      return kExitInternal;
  }
}

// Effective settings after merging defaults <- config file <- env <- flags.
struct Settings {
  phishscope::PipelineConfig pipeline;
  phishscope::CrawlConfig crawl;
};

std::optional<std::string> env_value(const char* name) {
  const char* value = std::getenv(name);
  if (value == nullptr || *value == '\0') return std::nullopt;
  return std::string(value);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw phishscope::Error(phishscope::Errc::not_found,
                            "cannot open file: " + path, path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int json_int(const nlohmann::json& node, const char* key, int fallback) {
  auto it = node.find(key);
  if (it == node.end()) return fallback;
  if (!it->is_number_integer()) {
    throw phishscope::Error(phishscope::Errc::invalid_config,
                            std::string("config key '") + key +
                                "' must be an integer",
                            key);
  }
  return it->get<int>();
}

std::string json_string(const nlohmann::json& node, const char* key,
                        const std::string& fallback) {
  auto it = node.find(key);
  if (it == node.end()) return fallback;
  if (!it->is_string()) {
    throw phishscope::Error(phishscope::Errc::invalid_config,
                            std::string("config key '") + key +
                                "' must be a string",
                            key);
  }
  return it->get<std::string>();
}

// Config file layer. The API key is deliberately not accepted here: secrets
// travel through the environment only.
void apply_config_file(Settings& s, const std::string& path) {
  nlohmann::json doc = nlohmann::json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw phishscope::Error(phishscope::Errc::invalid_config,
                            "config file is not a JSON object: " + path, path);
  }
  s.pipeline.backend.endpoint =
      json_string(doc, "endpoint", s.pipeline.backend.endpoint);
  s.pipeline.backend.model_name =
      json_string(doc, "model", s.pipeline.backend.model_name);
  if (doc.contains("temperature")) {
    if (!doc["temperature"].is_number()) {
      throw phishscope::Error(phishscope::Errc::invalid_config,
                              "config key 'temperature' must be a number",
                              "temperature");
    }
    s.pipeline.backend.temperature = doc["temperature"].get<double>();
  }
  s.pipeline.backend.max_retries =
      json_int(doc, "max_retries", s.pipeline.backend.max_retries);
  s.pipeline.backend.concurrency =
      json_int(doc, "concurrency", s.pipeline.backend.concurrency);

  std::string counter_name = json_string(doc, "token_counter", "");
  if (!counter_name.empty()) {
    s.pipeline.counter = phishscope::make_counter(counter_name);
  }
  s.pipeline.simplify.max_attr_len =
      json_int(doc, "max_attr_len", s.pipeline.simplify.max_attr_len);

  if (doc.contains("budget")) {
    const nlohmann::json& b = doc["budget"];
    if (!b.is_object()) {
      throw phishscope::Error(phishscope::Errc::invalid_config,
                              "config key 'budget' must be an object",
                              "budget");
    }
    phishscope::TokenBudget& budget = s.pipeline.budget;
    budget.total = json_int(b, "total", budget.total);
    budget.template_tokens = json_int(b, "template", budget.template_tokens);
    budget.html_max = json_int(b, "html", budget.html_max);
    budget.ocr_max = json_int(b, "ocr", budget.ocr_max);
    budget.url_max = json_int(b, "url", budget.url_max);
    if (!budget.consistent()) {
      throw phishscope::Error(phishscope::Errc::invalid_config,
                              "budget sections do not fit the total",
                              "budget");
    }
  }

  if (doc.contains("capture")) {
    const nlohmann::json& c = doc["capture"];
    if (!c.is_object()) {
      throw phishscope::Error(phishscope::Errc::invalid_config,
                              "config key 'capture' must be an object",
                              "capture");
    }
    s.crawl.debug_endpoint =
        json_string(c, "debug_endpoint", s.crawl.debug_endpoint);
    s.crawl.navigation_timeout = std::chrono::milliseconds(json_int(
        c, "navigation_timeout_ms", (int)s.crawl.navigation_timeout.count()));
    s.crawl.settle_delay = std::chrono::milliseconds(
        json_int(c, "settle_delay_ms", (int)s.crawl.settle_delay.count()));
    s.crawl.connect_timeout = std::chrono::milliseconds(
        json_int(c, "connect_timeout_ms", (int)s.crawl.connect_timeout.count()));
    s.crawl.screenshot_dir =
        json_string(c, "screenshot_dir", s.crawl.screenshot_dir);
    std::string profile = json_string(c, "profile", "");
    if (!profile.empty()) {
      auto parsed = phishscope::parse_profile_name(profile);
      if (!parsed) {
        throw phishscope::Error(phishscope::Errc::invalid_config,
                                "unknown capture profile: " + profile,
                                profile);
      }
      s.crawl.profile = *parsed;
    }
  }
}

void apply_env(Settings& s) {
  if (auto v = env_value("PHISHSCOPE_ENDPOINT")) s.pipeline.backend.endpoint = *v;
  if (auto v = env_value("PHISHSCOPE_MODEL")) s.pipeline.backend.model_name = *v;
  if (auto v = env_value("PHISHSCOPE_API_KEY")) s.pipeline.backend.api_key = *v;
  if (auto v = env_value("PHISHSCOPE_TOKEN_COUNTER")) {
    s.pipeline.counter = phishscope::make_counter(*v);
  }
}

struct GlobalFlags {
  std::string config_path;
  std::string token_counter;
};

struct BackendFlags {
  std::string endpoint;
  std::string model;
  std::string mock_dir;
  std::string template_path;
};

void add_backend_flags(CLI::App* cmd, BackendFlags& flags) {
  cmd->add_option("--endpoint", flags.endpoint,
                  "Chat-completions URL (http)");
  cmd->add_option("--model", flags.model, "Model name sent to the backend");
  cmd->add_option("--mock", flags.mock_dir,
                  "Fixture directory; selects the deterministic mock backend");
  cmd->add_option("--template", flags.template_path,
                  "Prompt template file overriding the built-in one");
}

// Flags win over env, env over config file, config file over defaults.
Settings resolve_settings(const GlobalFlags& global,
                          const BackendFlags& backend) {
  Settings s;
  if (!global.config_path.empty()) apply_config_file(s, global.config_path);
  apply_env(s);
  if (!global.token_counter.empty()) {
    s.pipeline.counter = phishscope::make_counter(global.token_counter);
  }
  if (!backend.endpoint.empty()) s.pipeline.backend.endpoint = backend.endpoint;
  if (!backend.model.empty()) s.pipeline.backend.model_name = backend.model;
  if (!backend.mock_dir.empty()) {
    s.pipeline.backend.mock_fixtures_dir = backend.mock_dir;
  }
  if (!backend.template_path.empty()) {
    s.pipeline.template_text =
        phishscope::load_prompt_template(backend.template_path);
  }
  return s;
}

int cmd_capture(const Settings& settings, const std::string& url,
                const std::string& out_dir, const std::string& profile,
                const std::string& label, const std::string& screenshot_dir) {
  phishscope::CrawlConfig config = settings.crawl;
  if (!profile.empty()) {
    auto parsed = phishscope::parse_profile_name(profile);
    if (!parsed) {
      throw phishscope::Error(phishscope::Errc::invalid_config,
                              "unknown profile: " + profile, profile);
    }
    config.profile = *parsed;
  }
  config.screenshot_dir = screenshot_dir.empty() ? out_dir : screenshot_dir;
  std::filesystem::create_directories(out_dir);
  std::filesystem::create_directories(config.screenshot_dir);

  phishscope::PageSnapshot snapshot = phishscope::capture(url, config);
  if (!label.empty()) {
    auto parsed = phishscope::parse_label(label);
    if (!parsed) {
      throw phishscope::Error(phishscope::Errc::invalid_config,
                              "unknown label: " + label, label);
    }
    snapshot.label = *parsed;
  }
  std::string path = phishscope::store_snapshot(snapshot, out_dir);
  std::cout << path << "\n";
  for (const std::string& warning : snapshot.warnings) {
    std::cerr << "warning: " << warning << "\n";
  }
  return kExitOk;
}

int cmd_simplify_html(const Settings& settings, const std::string& in_path,
                      int budget) {
  std::string html = read_file(in_path);
  phishscope::SimplifyResult result = phishscope::simplify_html(
      html, budget, *settings.pipeline.counter, settings.pipeline.simplify);
  std::cout << result.html << "\n";
  if (result.truncated) {
    std::cerr << "note: input exceeded the budget; output truncated\n";
  }
  if (result.removed_keep_tags) {
    std::cerr << "note: content-bearing tags were pruned to fit the budget\n";
  }
  return kExitOk;
}

int cmd_simplify_ocr(const Settings& settings, const std::string& in_path,
                     int budget) {
  phishscope::PageSnapshot snapshot = phishscope::load_snapshot(in_path);
  phishscope::OcrSimplifyResult result = phishscope::simplify_ocr(
      snapshot.ocr_lines, budget, *settings.pipeline.counter);
  std::cout << result.text << "\n";
  if (result.truncated) {
    std::cerr << "note: input exceeded the budget; output truncated\n";
  }
  return kExitOk;
}

int cmd_build_prompt(const Settings& settings, const std::string& snap_path) {
  phishscope::PageSnapshot snapshot = phishscope::load_snapshot(snap_path);
  phishscope::PromptBundle bundle =
      phishscope::prompt_for_snapshot(snapshot, settings.pipeline);
  std::cout << bundle.text;
  return kExitOk;
}

int cmd_classify(const Settings& settings, const std::string& snap_path) {
  phishscope::PageSnapshot snapshot = phishscope::load_snapshot(snap_path);
  phishscope::ClassifyOutcome outcome =
      phishscope::classify_snapshot(snapshot, settings.pipeline);
  std::cout << phishscope::verdict_to_json(outcome.verdict);
  std::cout << "label: " << phishscope::label_name(outcome.label) << "\n";
  return kExitOk;
}

int cmd_evaluate(const Settings& settings, const std::string& manifest_path,
                 const std::string& out_dir, double abort_ratio) {
  phishscope::DatasetManifest manifest =
      phishscope::load_manifest(manifest_path);
  std::filesystem::create_directories(out_dir);
  phishscope::EvaluateOptions options;
  options.out_dir = out_dir;
  options.abort_failure_ratio = abort_ratio;
  phishscope::EvaluateOutcome outcome =
      phishscope::evaluate_manifest(manifest, settings.pipeline, options);
  if (outcome.aborted) {
    std::cerr << "phishscope: aborted: " << outcome.backend_failures << " of "
              << outcome.attempted << " samples failed at the backend\n";
    for (const std::string& id : outcome.failure_ids) {
      std::cerr << "  failed: " << id << "\n";
    }
    return kExitAborted;
  }
  std::cout << outcome.run_report.text;
  if (outcome.backend_failures > 0) {
    std::cerr << "note: " << outcome.backend_failures
              << " sample(s) failed at the backend and were scored as"
                 " failed parses\n";
  }
  return kExitOk;
}

int cmd_parse(const std::string& in_path) {
  std::string raw = read_file(in_path);
  phishscope::Verdict verdict = phishscope::parse_response(raw);
  std::cout << phishscope::verdict_to_json(verdict);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phishing-site detection pipeline"};
  app.require_subcommand(1);

  GlobalFlags global;
  app.add_option("--config", global.config_path,
                 "JSON config file (flags and env vars win over it)");
  app.add_option("--token-counter", global.token_counter,
                 "Token counter name: bytes4 or vocab:<path>");

  BackendFlags backend;

  std::string url;
  std::string out_dir;
  std::string profile;
  std::string label;
  std::string screenshot_dir;
  CLI::App* capture = app.add_subcommand(
      "capture", "Capture one page from a devtools-enabled browser");
  capture->add_option("--url", url, "Page URL to visit")->required();
  capture->add_option("--out", out_dir, "Snapshot output directory")
      ->required();
  capture->add_option("--profile", profile,
                      "Device profile: desktop_chrome or mobile_safari");
  capture->add_option("--label", label,
                      "Ground-truth label to store: phishing or non_phishing");
  capture->add_option("--screenshot-dir", screenshot_dir,
                      "Screenshot directory (default: the --out directory)");
  capture->add_option("--debug-endpoint", backend.endpoint,
                      "Browser devtools HTTP endpoint");

  std::string in_path;
  int html_budget = -1;
  CLI::App* simplify_html = app.add_subcommand(
      "simplify-html", "Reduce an HTML file under the token budget");
  simplify_html->add_option("--in", in_path, "HTML file")->required();
  simplify_html->add_option("--budget", html_budget, "Token budget");

  int ocr_budget = -1;
  CLI::App* simplify_ocr = app.add_subcommand(
      "simplify-ocr", "Reduce a snapshot's OCR text under the token budget");
  simplify_ocr->add_option("--in", in_path, "Snapshot JSON file")->required();
  simplify_ocr->add_option("--budget", ocr_budget, "Token budget");

  std::string snap_path;
  CLI::App* build_prompt = app.add_subcommand(
      "build-prompt", "Render the detection prompt for a snapshot");
  build_prompt->add_option("--snapshot", snap_path, "Snapshot JSON file")
      ->required();
  build_prompt->add_option("--template", backend.template_path,
                           "Prompt template file");

  CLI::App* classify = app.add_subcommand(
      "classify", "Classify one snapshot end to end");
  classify->add_option("--snapshot", snap_path, "Snapshot JSON file")
      ->required();
  add_backend_flags(classify, backend);

  std::string manifest_path;
  std::string eval_out;
  double abort_ratio = 0.10;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Classify a whole manifest and write the report");
  evaluate->add_option("--manifest", manifest_path, "Manifest JSON file")
      ->required();
  evaluate->add_option("--out", eval_out, "Artifact + report directory")
      ->required();
  evaluate->add_option("--abort-ratio", abort_ratio,
                       "Abort when the backend failure share exceeds this");
  add_backend_flags(evaluate, backend);

  std::string response_path;
  CLI::App* parse = app.add_subcommand(
      "parse", "Parse a raw model response into a verdict");
  parse->add_option("--in", response_path, "Response text file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (parse->parsed()) return cmd_parse(response_path);

    Settings settings = resolve_settings(global, backend);
    if (capture->parsed()) {
      if (!backend.endpoint.empty()) {
        settings.crawl.debug_endpoint = backend.endpoint;
      }
      return cmd_capture(settings, url, out_dir, profile, label,
                         screenshot_dir);
    }
    if (simplify_html->parsed()) {
      int budget =
          html_budget > 0 ? html_budget : settings.pipeline.budget.html_max;
      return cmd_simplify_html(settings, in_path, budget);
    }
    if (simplify_ocr->parsed()) {
      int budget =
          ocr_budget > 0 ? ocr_budget : settings.pipeline.budget.ocr_max;
      return cmd_simplify_ocr(settings, in_path, budget);
    }
    if (build_prompt->parsed()) return cmd_build_prompt(settings, snap_path);
    if (classify->parsed()) return cmd_classify(settings, snap_path);
    if (evaluate->parsed()) {
      return cmd_evaluate(settings, manifest_path, eval_out, abort_ratio);
    }
  } catch (const phishscope::Error& e) {
    std::cerr << "phishscope: error: " << e.what();
    if (!e.detail().empty()) std::cerr << " (" << e.detail() << ")";
    std::cerr << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "phishscope: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;  // unreachable: require_subcommand(1)
}
