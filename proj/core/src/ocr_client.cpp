#include "phishscope/ocr_client.hpp"

#include <fstream>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "phishscope/error.hpp"
#include "phishscope/util/url.hpp"

namespace phishscope {

namespace {

using nlohmann::json;

}  // namespace

OcrExtraction extract_lines(const std::string& image_path,
                            const OcrServiceConfig& config) {
  std::ifstream in(image_path, std::ios::binary);
  if (!in) throw Error(Errc::not_found, "image file not found", image_path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string image = buf.str();

  auto endpoint = util::parse_url(config.endpoint);
  if (!endpoint || endpoint->scheme != "http")
    throw Error(Errc::invalid_config,
                "OCR service endpoint must be an http URL", config.endpoint);

  httplib::Client client(endpoint->host, endpoint->effective_port());
  const auto timeout_s =
      std::chrono::duration_cast<std::chrono::seconds>(config.request_timeout);
  client.set_connection_timeout(timeout_s.count(), 0);
  client.set_read_timeout(timeout_s.count(), 0);

  httplib::Headers headers;
  if (!config.api_key.empty()) headers.emplace("api-key", config.api_key);

  auto res = client.Post(endpoint->path_query, headers, image,
                         "application/octet-stream");
  if (!res)
    throw Error(Errc::service_unreachable,
                "cannot reach OCR service " + config.endpoint, image_path);
  if (res->status == 429)
    throw Error(Errc::quota_exceeded, "OCR service quota exhausted (HTTP 429)",
                image_path);
  if (res->status == 400 || res->status == 415)
    throw Error(Errc::unsupported_image,
                "OCR service rejected the image (HTTP " +
                    std::to_string(res->status) + ")",
                image_path);
  if (res->status != 200)
    throw Error(Errc::service_unreachable,
                "OCR service error (HTTP " + std::to_string(res->status) + ")",
                image_path);

  json doc = json::parse(res->body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("lines") ||
      !doc["lines"].is_array())
    throw Error(Errc::service_unreachable,
                "OCR service returned an unrecognized payload", image_path);

  OcrExtraction out;
  std::size_t index = 0;
  for (const auto& item : doc["lines"]) {
    ++index;
    if (!item.is_object() || !item.contains("text") || !item["text"].is_string())
      continue;
    OcrLine line;
    line.text = item["text"].get<std::string>();
    if (line.text.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    if (item.contains("bbox") && item["bbox"].is_object() &&
        item["bbox"].contains("h") && item["bbox"]["h"].is_number() &&
        item["bbox"]["h"].get<double>() > 0) {
      line.font_height = item["bbox"]["h"].get<double>();
    } else {
      line.font_height = 1.0;
      out.warnings.push_back("line " + std::to_string(index) +
                             " missing geometry; defaulted font_height to 1");
    }
    out.lines.push_back(std::move(line));
  }
  return out;
}

}  // namespace phishscope
