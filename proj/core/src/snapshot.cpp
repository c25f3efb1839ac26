#include "phishscope/snapshot.hpp"

#include <sys/stat.h>

#include <chrono>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "phishscope/error.hpp"
#include "phishscope/util/time.hpp"
#include "phishscope/util/url.hpp"

namespace phishscope {

namespace {

using nlohmann::json;

bool file_exists(const std::string& path) {
  struct stat st{};
  return ::stat(path.c_str(), &st) == 0;
}

bool is_whitespace_only(std::string_view s) {
  for (char c : s)
    if (c != ' ' && c != '\t' && c != '\r' && c != '\n') return false;
  return true;
}

bool safe_id(std::string_view id) {
  if (id.empty()) return false;
  for (char c : id) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
              (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
    if (!ok) return false;
  }
  return id != "." && id != "..";
}

[[noreturn]] void malformed(const std::string& message, const std::string& field) {
  throw Error(Errc::malformed_snapshot, message, field);
}

std::string dirname_of(const std::string& path) {
  auto pos = path.find_last_of('/');
  if (pos == std::string::npos) return ".";
  if (pos == 0) return "/";
  return path.substr(0, pos);
}

std::string join_path(const std::string& dir, const std::string& rel) {
  if (rel.empty()) return dir;
  if (rel.front() == '/') return rel;
  if (dir.empty() || dir == ".") return rel;
  if (dir.back() == '/') return dir + rel;
  return dir + "/" + rel;
}

const json* find_key(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

std::string require_string(const json& obj, const char* key) {
  const json* v = find_key(obj, key);
  if (!v) malformed(std::string("missing field '") + key + "'", key);
  if (!v->is_string()) malformed(std::string("field '") + key + "' must be a string", key);
  return v->get<std::string>();
}

}  // namespace

std::string_view label_name(Label label) {
  return label == Label::phishing ? "phishing" : "non_phishing";
}

std::optional<Label> parse_label(std::string_view name) {
  if (name == "phishing") return Label::phishing;
  if (name == "non_phishing") return Label::non_phishing;
  return std::nullopt;
}

std::string_view profile_name_str(ProfileName name) {
  return name == ProfileName::desktop_chrome ? "desktop_chrome" : "mobile_safari";
}

std::optional<ProfileName> parse_profile_name(std::string_view name) {
  if (name == "desktop_chrome") return ProfileName::desktop_chrome;
  if (name == "mobile_safari") return ProfileName::mobile_safari;
  return std::nullopt;
}

bool operator==(const PageSnapshot& a, const PageSnapshot& b) {
  using std::chrono::floor;
  using std::chrono::seconds;
  return a.id == b.id && a.requested_url == b.requested_url &&
         a.final_url == b.final_url && a.html == b.html &&
         a.screenshot_ref == b.screenshot_ref && a.ocr_lines == b.ocr_lines &&
         a.profile == b.profile &&
         floor<seconds>(a.fetched_at) == floor<seconds>(b.fetched_at) &&
         a.label == b.label && a.capture_error == b.capture_error &&
         a.warnings == b.warnings;
}

void validate_snapshot(const PageSnapshot& s) {
  if (!safe_id(s.id))
    malformed("id must be a non-empty [A-Za-z0-9._-]+ string", "id");
  if (!util::parse_url(s.requested_url))
    malformed("requested_url is not an absolute URL: " + s.requested_url,
              "requested_url");
  if (!util::parse_url(s.final_url))
    malformed("final_url is not an absolute URL: " + s.final_url, "final_url");
  if (s.html.empty() && !s.capture_error)
    malformed("html is empty but capture_error is not set", "html");
  if (s.screenshot_ref && s.screenshot_ref->empty())
    malformed("screenshot_ref present but empty", "screenshot_ref");
  for (const auto& line : s.ocr_lines) {
    if (is_whitespace_only(line.text))
      malformed("ocr line text empty after trimming", "text");
    if (!(line.font_height > 0))
      malformed("ocr line font_height must be > 0", "font_height");
  }
}

PageSnapshot load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::not_found, "snapshot file not found", path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_snapshot,
                std::string("snapshot is not valid structured text: ") + e.what(),
                "json");
  }
  if (!doc.is_object()) malformed("snapshot root must be an object", "json");

  PageSnapshot s;
  s.id = require_string(doc, "id");
  s.requested_url = require_string(doc, "requested_url");
  s.final_url = require_string(doc, "final_url");
  s.html = require_string(doc, "html");

  if (const json* v = find_key(doc, "screenshot_ref")) {
    if (!v->is_string()) malformed("screenshot_ref must be a string", "screenshot_ref");
    s.screenshot_ref = v->get<std::string>();
  }

  if (const json* v = find_key(doc, "ocr_lines")) {
    if (!v->is_array()) malformed("ocr_lines must be an array", "ocr_lines");
    for (const auto& item : *v) {
      if (!item.is_object()) malformed("ocr_lines entries must be objects", "ocr_lines");
      OcrLine line;
      line.text = require_string(item, "text");
      const json* fh = find_key(item, "font_height");
      if (!fh || !fh->is_number())
        malformed("ocr line font_height must be a number", "font_height");
      line.font_height = fh->get<double>();
      s.ocr_lines.push_back(std::move(line));
    }
  }

  const std::string profile = require_string(doc, "profile");
  if (auto p = parse_profile_name(profile)) {
    s.profile = *p;
  } else {
    malformed("unknown profile: " + profile, "profile");
  }

  const std::string fetched = require_string(doc, "fetched_at");
  if (auto t = util::parse_rfc3339(fetched)) {
    s.fetched_at = *t;
  } else {
    malformed("fetched_at is not an RFC 3339 UTC timestamp: " + fetched,
              "fetched_at");
  }

  if (const json* v = find_key(doc, "label")) {
    if (!v->is_string()) malformed("label must be a string", "label");
    if (auto l = parse_label(v->get<std::string>())) {
      s.label = *l;
    } else {
      malformed("unknown label: " + v->get<std::string>(), "label");
    }
  }

  if (const json* v = find_key(doc, "capture_error")) {
    if (!v->is_boolean()) malformed("capture_error must be a boolean", "capture_error");
    s.capture_error = v->get<bool>();
  }

  if (const json* v = find_key(doc, "warnings")) {
    if (!v->is_array()) malformed("warnings must be an array", "warnings");
    for (const auto& w : *v) {
      if (!w.is_string()) malformed("warnings entries must be strings", "warnings");
      s.warnings.push_back(w.get<std::string>());
    }
  }

  validate_snapshot(s);
  return s;
}

std::string store_snapshot(const PageSnapshot& snapshot, const std::string& dir) {
  validate_snapshot(snapshot);
  const std::string path = join_path(dir, snapshot.id + ".json");
  if (file_exists(path))
    throw Error(Errc::duplicate_id,
                "a snapshot with this id already exists in " + dir, snapshot.id);

  std::vector<std::string> warnings = snapshot.warnings;
  if (snapshot.screenshot_ref &&
      !file_exists(join_path(dir, *snapshot.screenshot_ref)))
    warnings.push_back("screenshot file missing: " + *snapshot.screenshot_ref);

  json doc;
  doc["id"] = snapshot.id;
  doc["requested_url"] = snapshot.requested_url;
  doc["final_url"] = snapshot.final_url;
  doc["html"] = snapshot.html;
  if (snapshot.screenshot_ref) doc["screenshot_ref"] = *snapshot.screenshot_ref;
  json lines = json::array();
  for (const auto& line : snapshot.ocr_lines)
    lines.push_back({{"text", line.text}, {"font_height", line.font_height}});
  doc["ocr_lines"] = std::move(lines);
  doc["profile"] = std::string(profile_name_str(snapshot.profile));
  doc["fetched_at"] = util::format_rfc3339(snapshot.fetched_at);
  if (snapshot.label) doc["label"] = std::string(label_name(*snapshot.label));
  if (snapshot.capture_error) doc["capture_error"] = true;
  if (!warnings.empty()) doc["warnings"] = warnings;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot open snapshot file for writing", path);
  out << doc.dump(2) << "\n";
  out.flush();
  if (!out) throw Error(Errc::io_error, "failed writing snapshot file", path);
  return path;
}

std::string resolve_entry_path(const DatasetManifest& manifest,
                               const ManifestEntry& entry) {
  return join_path(manifest.base_dir, entry.snapshot_path);
}

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::not_found, "manifest file not found", path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_manifest,
                std::string("manifest is not valid structured text: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_array())
    throw Error(Errc::malformed_manifest, "manifest must contain an 'entries' array");

  DatasetManifest m;
  m.base_dir = dirname_of(path);

  for (const auto& item : doc["entries"]) {
    if (!item.is_object())
      throw Error(Errc::malformed_manifest, "entries must be objects");
    ManifestEntry e;
    auto get = [&](const char* key) -> std::string {
      auto it = item.find(key);
      if (it == item.end() || !it->is_string())
        throw Error(Errc::malformed_manifest,
                    std::string("entry missing string field '") + key + "'", key);
      return it->get<std::string>();
    };
    e.id = get("id");
    e.snapshot_path = get("snapshot_path");
    const std::string label = get("label");
    if (auto l = parse_label(label)) {
      e.label = *l;
    } else {
      throw Error(Errc::malformed_manifest, "unknown label: " + label, e.id);
    }
    m.entries.push_back(std::move(e));
  }

  if (auto it = doc.find("metadata"); it != doc.end() && !it->is_null()) {
    if (!it->is_object())
      throw Error(Errc::malformed_manifest, "metadata must be an object");
    for (auto kv = it->begin(); kv != it->end(); ++kv) {
      if (!kv.value().is_string())
        throw Error(Errc::malformed_manifest, "metadata values must be strings",
                    kv.key());
      m.metadata[kv.key()] = kv.value().get<std::string>();
    }
  }

  std::map<std::string, int> seen;
  for (const auto& e : m.entries) {
    if (++seen[e.id] > 1)
      throw Error(Errc::malformed_manifest, "duplicate id in manifest", e.id);
  }
  for (const auto& e : m.entries) {
    if (!file_exists(resolve_entry_path(m, e)))
      throw Error(Errc::dangling_path,
                  "snapshot path does not resolve: " + e.snapshot_path, e.id);
  }
  return m;
}

void store_manifest(const DatasetManifest& manifest, const std::string& path) {
  json doc;
  json entries = json::array();
  for (const auto& e : manifest.entries)
    entries.push_back({{"id", e.id},
                       {"snapshot_path", e.snapshot_path},
                       {"label", std::string(label_name(e.label))}});
  doc["entries"] = std::move(entries);
  doc["metadata"] = manifest.metadata;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot open manifest for writing", path);
  out << doc.dump(2) << "\n";
  out.flush();
  if (!out) throw Error(Errc::io_error, "failed writing manifest", path);
}

}  // namespace phishscope
