#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace phishscope {

enum class Label { phishing, non_phishing };

std::string_view label_name(Label label);
std::optional<Label> parse_label(std::string_view name);

struct OcrLine {
  std::string text;          // non-empty after trimming
  double font_height = 1.0;  // rendered glyph height in px, > 0

  friend bool operator==(const OcrLine& a, const OcrLine& b) {
    return a.text == b.text && a.font_height == b.font_height;
  }
};

enum class ProfileName { desktop_chrome, mobile_safari };

std::string_view profile_name_str(ProfileName name);
std::optional<ProfileName> parse_profile_name(std::string_view name);

struct DeviceProfile {
  ProfileName name = ProfileName::desktop_chrome;
  std::string user_agent;
  int viewport_width = 0;
  int viewport_height = 0;
};

struct PageSnapshot {
  std::string id;
  std::string requested_url;
  std::string final_url;
  std::string html;  // post-script-execution markup; empty only on capture error
  std::optional<std::string> screenshot_ref;  // relative sibling path
  std::vector<OcrLine> ocr_lines;             // reading order
  ProfileName profile = ProfileName::desktop_chrome;
  std::chrono::system_clock::time_point fetched_at{};
  std::optional<Label> label;
  bool capture_error = false;
  std::vector<std::string> warnings;

  // Field-wise equality; timestamps compared at 1-second precision.
  friend bool operator==(const PageSnapshot& a, const PageSnapshot& b);
};

struct ManifestEntry {
  std::string id;
  std::string snapshot_path;  // as written in the manifest file
  Label label = Label::non_phishing;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::map<std::string, std::string> metadata;
  std::string base_dir;  // directory of the manifest file; "" if unknown
};

// Throws Error(Errc::malformed_snapshot) naming the offending field in
// detail() if any invariant fails.
void validate_snapshot(const PageSnapshot& snapshot);

// Errors: not_found, malformed_snapshot (detail names the field).
PageSnapshot load_snapshot(const std::string& path);

// Writes <dir>/<id>.json and returns its path. A snapshot id that already
// has a file in dir is rejected with duplicate_id. A screenshot_ref whose
// file is absent is recorded as a warning inside the stored file, not an
// error. Errors: malformed_snapshot, duplicate_id, io_error.
std::string store_snapshot(const PageSnapshot& snapshot, const std::string& dir);

// snapshot_path entries resolve relative to the manifest's directory.
std::string resolve_entry_path(const DatasetManifest& manifest,
                               const ManifestEntry& entry);

// Eagerly validates: unique ids, labels from the two-value enum, every
// snapshot_path resolving to an existing file.
// Errors: not_found, malformed_manifest, dangling_path (detail = entry id).
DatasetManifest load_manifest(const std::string& path);

// Errors: io_error.
void store_manifest(const DatasetManifest& manifest, const std::string& path);

}  // namespace phishscope
