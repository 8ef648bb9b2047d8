#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

namespace eqr::http {

using Milliseconds = std::chrono::milliseconds;

struct Request {
    std::string method = "GET";
    std::string url;
    std::vector<std::pair<std::string, std::string>> headers;
    std::string body;
    Milliseconds timeout{30000};
};

struct Response {
    long status = 0;  // 0 when the transport failed
    std::string body;
    std::map<std::string, std::string> headers;  // lowercase names
    std::string transport_error;
};

class Client {
public:
    virtual ~Client() = default;
    virtual Response send(const Request& request) = 0;
};

/// libcurl-backed client. One easy handle per call, so a single instance
/// is safe to share across threads.
class CurlClient : public Client {
public:
    CurlClient();
    Response send(const Request& request) override;
};

/// Clock and sleep hooks so tests can observe pacing without waiting.
struct Timing {
    std::function<std::chrono::steady_clock::time_point()> now = [] { return std::chrono::steady_clock::now(); };
    std::function<void(Milliseconds)> sleep;  // defaults to std::this_thread::sleep_for
};

struct RetryPolicy {
    double max_requests_per_second = 8.0;
    int max_retries = 4;
    Milliseconds backoff_initial{500};
    Milliseconds backoff_max{8000};
};

/// Spaces requests at least 1/rate apart across all callers.
class RateLimiter {
public:
    RateLimiter(double max_requests_per_second, Timing timing = {});
    void acquire();

private:
    std::chrono::steady_clock::duration interval_;
    Timing timing_;
    std::mutex mutex_;
    std::chrono::steady_clock::time_point next_slot_{};
    bool first_ = true;
};

/// Delay before retry number `attempt` (0-based): a Retry-After header in
/// seconds takes precedence, otherwise initial * 2^attempt capped at max.
Milliseconds backoff_delay(const RetryPolicy& policy, int attempt, const Response& response);

/// Sends through the limiter, retrying 429/503 with exponential backoff.
/// Exhausted retries raise RateLimited (429, with a retry_after_ms detail)
/// or SourceUnavailable; transport failures raise SourceUnavailable.
/// Other statuses are returned for the caller to interpret.
Response send_with_retry(Client& client, const Request& request, const RetryPolicy& policy, RateLimiter& limiter,
                         const Timing& timing, const std::string& source_name);

}  // namespace eqr::http
