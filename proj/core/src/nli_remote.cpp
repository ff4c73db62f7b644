#include "zsx/nli_remote.hpp"

#include <cmath>
#include <semaphore>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

namespace zsx {
namespace {

using nlohmann::json;

struct ParsedUrl {
  std::string scheme_host_port;
  std::string path_prefix;
};

ParsedUrl parse_base_url(const std::string& url) {
  constexpr std::string_view kScheme = "http://";
  if (url.rfind(kScheme, 0) != 0) {
    throw Error(ErrorCode::kConfig,
                fmt::format("NLI URL '{}' must start with http://", url));
  }
  const auto slash = url.find('/', kScheme.size());
  ParsedUrl out;
  out.scheme_host_port = url.substr(0, slash);
  if (out.scheme_host_port.size() == kScheme.size()) {
    throw Error(ErrorCode::kConfig, fmt::format("NLI URL '{}' has no host", url));
  }
  if (slash != std::string::npos) {
    out.path_prefix = url.substr(slash);
    while (!out.path_prefix.empty() && out.path_prefix.back() == '/') out.path_prefix.pop_back();
  }
  return out;
}

}  // namespace

struct NliRemoteProvider::Impl {
  explicit Impl(std::ptrdiff_t slots) : in_flight(slots) {}

  ParsedUrl url;
  mutable std::counting_semaphore<1024> in_flight;
};

NliRemoteProvider::NliRemoteProvider(RemoteConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) {
    throw Error(ErrorCode::kConfig,
                fmt::format("nli-remote needs a base URL (--nli-url or {})", kNliUrlEnv));
  }
  if (config_.max_in_flight == 0 || config_.max_in_flight > 1024) {
    throw Error(ErrorCode::kConfig, "max in-flight requests must be in [1, 1024]");
  }
  if (config_.timeout.count() <= 0) throw Error(ErrorCode::kConfig, "timeout must be positive");
  impl_ = std::make_unique<Impl>(static_cast<std::ptrdiff_t>(config_.max_in_flight));
  impl_->url = parse_base_url(config_.base_url);
}

NliRemoteProvider::~NliRemoteProvider() = default;

std::string make_score_request(const std::string& premise,
                               std::span<const std::string> hypotheses) {
  json body;
  body["premise"] = premise;
  body["hypotheses"] = json::array();
  for (const auto& h : hypotheses) body["hypotheses"].push_back(h);
  return body.dump();
}

std::vector<double> parse_score_response(const std::string& body, std::size_t expected) {
  json parsed;
  try {
    parsed = json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kProviderProtocol, fmt::format("malformed score response: {}", e.what()));
  }
  if (!parsed.is_object() || !parsed.contains("scores") || !parsed["scores"].is_array()) {
    throw Error(ErrorCode::kProviderProtocol, "score response lacks a \"scores\" array");
  }
  const auto& scores = parsed["scores"];
  if (scores.size() != expected) {
    throw Error(ErrorCode::kProviderProtocol,
                fmt::format("score response has {} scores for {} hypotheses", scores.size(),
                            expected));
  }
  std::vector<double> out;
  out.reserve(expected);
  for (const auto& s : scores) {
    if (!s.is_number()) throw Error(ErrorCode::kProviderProtocol, "non-numeric score in response");
    const double p = s.get<double>();
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw Error(ErrorCode::kOutOfRange, fmt::format("remote score {} outside [0,1]", p));
    }
    out.push_back(p);
  }
  return out;
}

std::vector<std::optional<double>> NliRemoteProvider::score(
    const TextRef& text, std::span<const std::string> descriptors) const {
  if (descriptors.empty()) return {};
  const std::string body = make_score_request(text.text, descriptors);

  struct Slot {
    std::counting_semaphore<1024>& sem;
    explicit Slot(std::counting_semaphore<1024>& s) : sem(s) { sem.acquire(); }
    ~Slot() { sem.release(); }
  };

  httplib::Result result = [&] {
    Slot slot(impl_->in_flight);
    httplib::Client client(impl_->url.scheme_host_port);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs =
        std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    return client.Post(impl_->url.path_prefix + "/score", body, "application/json");
  }();

  if (!result) {
    throw Error(ErrorCode::kProviderUnavailable,
                fmt::format("NLI service at {} unreachable: {}", config_.base_url,
                            httplib::to_string(result.error())));
  }
  if (result->status != 200) {
    throw Error(ErrorCode::kProviderProtocol,
                fmt::format("NLI service returned HTTP {} for text '{}'", result->status, text.id));
  }
  const auto scores = parse_score_response(result->body, descriptors.size());
  return {scores.begin(), scores.end()};
}

}  // namespace zsx
