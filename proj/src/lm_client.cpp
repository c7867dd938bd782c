#include "gridwm/lm_client.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "gridwm/errors.hpp"

namespace gridwm {

namespace {

using json = nlohmann::json;

class RequestFailure : public std::runtime_error {
public:
    RequestFailure(std::string what, bool timeout, bool retryable)
        : std::runtime_error(std::move(what)), timeout(timeout), retryable(retryable) {}
    bool timeout;
    bool retryable;
};

class InFlightGuard {
public:
    explicit InFlightGuard(std::counting_semaphore<1024>& s) : s_(s) { s_.acquire(); }
    ~InFlightGuard() { s_.release(); }
    InFlightGuard(const InFlightGuard&) = delete;
    InFlightGuard& operator=(const InFlightGuard&) = delete;

private:
    std::counting_semaphore<1024>& s_;
};

}  // namespace

LmClient::LmClient(RemoteLmSpec spec)
    : spec_(std::move(spec)), in_flight_(std::clamp(spec_.max_in_flight, 1, 1024)) {
    const auto scheme_end = spec_.base_url.find("://");
    if (scheme_end == std::string::npos) throw std::invalid_argument("base_url must include a scheme: " + spec_.base_url);
    const auto path_start = spec_.base_url.find('/', scheme_end + 3);
    endpoint_.origin = spec_.base_url.substr(0, path_start);
    endpoint_.prefix = path_start == std::string::npos ? "" : spec_.base_url.substr(path_start);
    while (!endpoint_.prefix.empty() && endpoint_.prefix.back() == '/') endpoint_.prefix.pop_back();
    if (spec_.max_retries < 1) spec_.max_retries = 1;
}

std::string LmClient::post_json(const std::string& path, const std::string& body) {
    InFlightGuard guard(in_flight_);
    const auto id = next_id_.fetch_add(1);

    httplib::Client client(endpoint_.origin);
    const auto secs = std::chrono::duration<double>(spec_.timeout_seconds);
    const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(secs);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    httplib::Headers headers{{"X-Request-Id", std::to_string(id)}};
    if (const char* key = std::getenv(spec_.api_key_env.c_str()); key != nullptr && *key != '\0')
        headers.emplace("Authorization", std::string("Bearer ") + key);

    auto res = client.Post(endpoint_.prefix + path, headers, body, "application/json");
    if (!res) {
        const auto err = res.error();
        const bool timed_out = err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout;
        throw RequestFailure("request to " + endpoint_.origin + endpoint_.prefix + path + " failed: " +
                                 httplib::to_string(err),
                             timed_out, true);
    }
    if (res->status != 200) {
        const bool retryable = res->status == 429 || res->status >= 500;
        throw RequestFailure("endpoint returned HTTP " + std::to_string(res->status), false, retryable);
    }
    return res->body;
}

Completion LmClient::complete(std::string_view prompt) {
    const json body = {
        {"model", spec_.model},
        {"messages", json::array({{{"role", "user"}, {"content", std::string(prompt)}}})},
        {"temperature", spec_.temperature},
        {"top_p", spec_.top_p},
        {"max_tokens", spec_.max_new_tokens},
    };
    const std::string payload = body.dump();
    bool last_timeout = false;
    std::string last_error;
    for (int attempt = 0; attempt < spec_.max_retries; ++attempt) {
        if (attempt > 0) {
            const double delay = spec_.backoff_seconds * std::pow(2.0, attempt - 1);
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        }
        try {
            const auto reply = json::parse(post_json("/chat/completions", payload));
            Completion out;
            out.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
            if (auto usage = reply.find("usage"); usage != reply.end() && usage->is_object()) {
                if (usage->contains("prompt_tokens")) out.prompt_tokens = usage->at("prompt_tokens").get<int>();
                if (usage->contains("completion_tokens"))
                    out.completion_tokens = usage->at("completion_tokens").get<int>();
            }
            return out;
        } catch (const RequestFailure& e) {
            last_timeout = e.timeout;
            last_error = e.what();
            if (!e.retryable) break;
        } catch (const json::exception& e) {
            last_timeout = false;
            last_error = std::string("malformed completion response: ") + e.what();
        }
    }
    if (last_timeout) throw Timeout(last_error);
    throw EndpointError(last_error);
}

std::vector<double> LmClient::token_logprobs(std::string_view text) {
    const json body = {
        {"model", spec_.model}, {"prompt", std::string(text)}, {"max_tokens", 0},
        {"echo", true},         {"logprobs", 0},
    };
    try {
        const auto reply = json::parse(post_json("/completions", body.dump()));
        std::vector<double> out;
        for (const auto& lp : reply.at("choices").at(0).at("logprobs").at("token_logprobs"))
            if (!lp.is_null()) out.push_back(lp.get<double>());
        return out;
    } catch (const RequestFailure& e) {
        throw ProviderError(e.what());
    } catch (const json::exception& e) {
        throw ProviderError(std::string("malformed logprob response: ") + e.what());
    }
}

}  // namespace gridwm
