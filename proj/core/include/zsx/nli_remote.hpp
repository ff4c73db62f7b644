#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <string>

#include "zsx/scorer.hpp"

namespace zsx {

struct RemoteConfig {
  // e.g. "http://127.0.0.1:8080" or "http://host:8080/prefix".
  std::string base_url;
  std::chrono::milliseconds timeout{std::chrono::seconds(30)};
  // Upper bound on requests in flight across all threads sharing the provider.
  std::size_t max_in_flight = 4;
};

inline constexpr const char* kNliUrlEnv = "ZSX_NLI_URL";

// Remote entailment scorer speaking the /score JSON protocol:
//   request  {"premise": <text>, "hypotheses": [<descriptor>, ...]}
//   response {"scores": [<p>, ...]}  (index-aligned, each p in [0, 1])
// Connection failures and timeouts raise kProviderUnavailable; non-200
// responses and malformed bodies raise kProviderProtocol; scores outside
// [0, 1] raise kOutOfRange.
class NliRemoteProvider final : public ScoreProvider {
 public:
  explicit NliRemoteProvider(RemoteConfig config);
  ~NliRemoteProvider() override;

  ProviderKind kind() const override { return ProviderKind::kNliRemote; }
  std::vector<std::optional<double>> score(
      const TextRef& text, std::span<const std::string> descriptors) const override;

  const RemoteConfig& config() const { return config_; }

 private:
  struct Impl;
  RemoteConfig config_;
  std::unique_ptr<Impl> impl_;
};

// Builds the JSON request body for the protocol above.
std::string make_score_request(const std::string& premise,
                               std::span<const std::string> hypotheses);

// Parses and validates a response body against the expected hypothesis count.
std::vector<double> parse_score_response(const std::string& body, std::size_t expected);

}  // namespace zsx
