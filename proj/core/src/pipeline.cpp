#include "phishscope/pipeline.hpp"

#include <atomic>
#include <fstream>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "phishscope/error.hpp"
#include "phishscope/util/sha1.hpp"
#include "phishscope/util/time.hpp"

namespace phishscope {

namespace {

using nlohmann::json;

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot open file for writing", path);
  out << content;
  out.flush();
  if (!out) throw Error(Errc::io_error, "failed writing file", path);
}

const std::string& template_of(const PipelineConfig& config) {
  return config.template_text.empty() ? default_prompt_template()
                                      : config.template_text;
}

}  // namespace

SimplifiedInputs simplify_snapshot(const PageSnapshot& snapshot,
                                   const PipelineConfig& config) {
  SimplifiedInputs out;
  SimplifyResult html = simplify_html(snapshot.html, config.budget.html_max,
                                      *config.counter, config.simplify);
  out.html = std::move(html.html);
  out.flags.html = html.truncated;
  out.removed_keep_tags = html.removed_keep_tags;

  OcrSimplifyResult ocr =
      simplify_ocr(snapshot.ocr_lines, config.budget.ocr_max, *config.counter);
  out.ocr = std::move(ocr.text);
  out.flags.ocr = ocr.truncated;
  return out;
}

PromptBundle prompt_for_snapshot(const PageSnapshot& snapshot,
                                 const PipelineConfig& config) {
  SimplifiedInputs inputs = simplify_snapshot(snapshot, config);
  return build_prompt(snapshot.final_url, inputs.html, inputs.ocr,
                      *config.counter, inputs.flags, template_of(config));
}

ClassifyOutcome classify_snapshot(const PageSnapshot& snapshot,
                                  const PipelineConfig& config) {
  ClassifyOutcome out;
  out.prompt = prompt_for_snapshot(snapshot, config);
  out.response = complete(out.prompt, config.backend);
  out.verdict = parse_response(out.response.text);
  out.label = classify(out.verdict);
  return out;
}

EvaluateOutcome evaluate_manifest(const DatasetManifest& manifest,
                                  const PipelineConfig& config,
                                  const EvaluateOptions& options) {
  struct SampleResult {
    std::string id;
    bool backend_failed = false;
    std::string error_text;
    std::string response_text;
    Verdict verdict;
  };

  // Load every snapshot before any backend call; load errors propagate.
  std::vector<PageSnapshot> snapshots;
  snapshots.reserve(manifest.entries.size());
  for (const auto& entry : manifest.entries)
    snapshots.push_back(load_snapshot(resolve_entry_path(manifest, entry)));

  const std::size_t n = snapshots.size();
  std::vector<SampleResult> results(n);
  std::shared_ptr<Transport> transport = make_transport(config.backend);

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      SampleResult& r = results[i];
      r.id = manifest.entries[i].id;
      try {
        PromptBundle prompt = prompt_for_snapshot(snapshots[i], config);
        RawResponse response =
            complete_with(*transport, prompt.text, config.backend);
        r.response_text = std::move(response.text);
        r.verdict = parse_response(r.response_text);
      } catch (const Error& e) {
        r.backend_failed = true;
        r.error_text = e.what();
        r.verdict = Verdict{};
        r.verdict.parse_mode = ParseMode::failed;
      }
    }
  };

  const int cap = std::max(1, config.backend.concurrency);
  std::vector<std::thread> pool;
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(cap), std::max<std::size_t>(n, 1));
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  EvaluateOutcome outcome;
  outcome.attempted = static_cast<int>(n);
  for (const auto& r : results) {
    if (r.backend_failed) {
      ++outcome.backend_failures;
      outcome.failure_ids.push_back(r.id);
    }
  }

  const bool have_dir = !options.out_dir.empty();
  if (have_dir) {
    for (const auto& r : results) {
      if (r.backend_failed)
        write_file(options.out_dir + "/" + r.id + ".error.txt",
                   r.error_text + "\n");
      else
        write_file(options.out_dir + "/" + r.id + ".response.txt",
                   r.response_text);
      write_file(options.out_dir + "/" + r.id + ".verdict.json",
                 verdict_to_json(r.verdict));
    }
  }

  if (n > 0 && static_cast<double>(outcome.backend_failures) >
                   options.abort_failure_ratio * static_cast<double>(n)) {
    outcome.aborted = true;
    return outcome;
  }

  std::map<std::string, Verdict> verdicts;
  for (const auto& r : results) verdicts[r.id] = r.verdict;
  outcome.run_report = report(manifest, verdicts);

  if (have_dir) {
    write_file(options.out_dir + "/report.txt", outcome.run_report.text);
    write_file(options.out_dir + "/report.json", outcome.run_report.json);
    if (!outcome.run_report.roc_tsv.empty())
      write_file(options.out_dir + "/roc.tsv", outcome.run_report.roc_tsv);

    json meta;
    meta["generated_at"] = util::format_rfc3339(std::chrono::system_clock::now());
    meta["model"] = config.backend.model_name;
    meta["backend"] = transport->name();
    meta["token_counter"] = config.counter->name();
    meta["prompt_template_sha1"] = util::sha1_hex(template_of(config));
    meta["prompt_role"] = "user";  // single user message per request
    meta["samples"] = outcome.attempted;
    meta["backend_failures"] = outcome.backend_failures;
    write_file(options.out_dir + "/run_meta.json", meta.dump(2) + "\n");
  }
  return outcome;
}

}  // namespace phishscope
