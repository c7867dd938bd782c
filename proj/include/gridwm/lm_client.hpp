#pragma once

#include <atomic>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

namespace gridwm {

/// Connection and decoding settings for an OpenAI-compatible endpoint.
/// Decoding defaults: temperature 1.0, top-p 1.0, 400 new tokens.
struct RemoteLmSpec {
    std::string base_url = "http://127.0.0.1:8000/v1";
    std::string model = "default";
    double temperature = 1.0;
    double top_p = 1.0;
    int max_new_tokens = 400;
    double timeout_seconds = 60.0;
    int max_retries = 3;
    double backoff_seconds = 0.5;
    int max_in_flight = 8;
    /// Name of the environment variable holding the bearer token.
    std::string api_key_env = "GRIDWM_API_KEY";
};

struct Completion {
    std::string text;
    std::optional<int> prompt_tokens;
    std::optional<int> completion_tokens;
};

/// Thread-safe client. Calls block while `max_in_flight` requests are
/// outstanding; each request carries its own correlation id and is matched
/// to its own response.
class LmClient {
public:
    explicit LmClient(RemoteLmSpec spec);

    /// POST {base_url}/chat/completions with a single user message.
    /// Throws Timeout or EndpointError once retries are exhausted.
    Completion complete(std::string_view prompt);

    /// Per-token log probabilities of `text` via {base_url}/completions with
    /// echo. Throws ProviderError.
    std::vector<double> token_logprobs(std::string_view text);

    const RemoteLmSpec& spec() const { return spec_; }

private:
    struct Endpoint {
        std::string origin;  // scheme://host[:port]
        std::string prefix;  // path prefix, no trailing slash
    };

    std::string post_json(const std::string& path, const std::string& body);

    RemoteLmSpec spec_;
    Endpoint endpoint_;
    std::counting_semaphore<1024> in_flight_;
    std::atomic<std::uint64_t> next_id_{1};
};

}  // namespace gridwm
