#include "eqr/common/http.hpp"

#include "eqr/common/error.hpp"

#include <curl/curl.h>

#include <algorithm>
#include <cctype>
#include <memory>
#include <thread>

namespace eqr::http {

namespace {

std::size_t write_body(char* data, std::size_t size, std::size_t nmemb, void* user) {
    static_cast<std::string*>(user)->append(data, size * nmemb);
    return size * nmemb;
}

std::size_t write_header(char* data, std::size_t size, std::size_t nmemb, void* user) {
    auto* headers = static_cast<std::map<std::string, std::string>*>(user);
    std::string line(data, size * nmemb);
    auto colon = line.find(':');
    if (colon != std::string::npos) {
        std::string name = line.substr(0, colon);
        std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
        std::string value = line.substr(colon + 1);
        auto first = value.find_first_not_of(" \t");
        auto last = value.find_last_not_of(" \t\r\n");
        (*headers)[name] = first == std::string::npos ? "" : value.substr(first, last - first + 1);
    }
    return size * nmemb;
}

void default_sleep(Milliseconds d) { std::this_thread::sleep_for(d); }

}  // namespace

CurlClient::CurlClient() {
    static const bool initialized = [] { return curl_global_init(CURL_GLOBAL_DEFAULT) == CURLE_OK; }();
    (void)initialized;
}

Response CurlClient::send(const Request& request) {
    Response response;
    std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> curl(curl_easy_init(), &curl_easy_cleanup);
    if (!curl) {
        response.transport_error = "curl_easy_init failed";
        return response;
    }
    curl_slist* header_list = nullptr;
    for (const auto& [name, value] : request.headers) {
        header_list = curl_slist_append(header_list, (name + ": " + value).c_str());
    }
    std::unique_ptr<curl_slist, decltype(&curl_slist_free_all)> headers_guard(header_list, &curl_slist_free_all);

    curl_easy_setopt(curl.get(), CURLOPT_URL, request.url.c_str());
    curl_easy_setopt(curl.get(), CURLOPT_HTTPHEADER, header_list);
    curl_easy_setopt(curl.get(), CURLOPT_TIMEOUT_MS, static_cast<long>(request.timeout.count()));
    curl_easy_setopt(curl.get(), CURLOPT_NOSIGNAL, 1L);
    curl_easy_setopt(curl.get(), CURLOPT_FOLLOWLOCATION, 1L);
    curl_easy_setopt(curl.get(), CURLOPT_ACCEPT_ENCODING, "");
    curl_easy_setopt(curl.get(), CURLOPT_WRITEFUNCTION, &write_body);
    curl_easy_setopt(curl.get(), CURLOPT_WRITEDATA, &response.body);
    curl_easy_setopt(curl.get(), CURLOPT_HEADERFUNCTION, &write_header);
    curl_easy_setopt(curl.get(), CURLOPT_HEADERDATA, &response.headers);
    if (request.method == "POST") {
        curl_easy_setopt(curl.get(), CURLOPT_POST, 1L);
        curl_easy_setopt(curl.get(), CURLOPT_POSTFIELDS, request.body.c_str());
        curl_easy_setopt(curl.get(), CURLOPT_POSTFIELDSIZE, static_cast<long>(request.body.size()));
    }

    const CURLcode rc = curl_easy_perform(curl.get());
    if (rc != CURLE_OK) {
        response.transport_error = curl_easy_strerror(rc);
        response.status = 0;
        return response;
    }
    curl_easy_getinfo(curl.get(), CURLINFO_RESPONSE_CODE, &response.status);
    return response;
}

RateLimiter::RateLimiter(double max_requests_per_second, Timing timing) : timing_(std::move(timing)) {
    if (!timing_.sleep) timing_.sleep = &default_sleep;
    if (max_requests_per_second <= 0) {
        interval_ = std::chrono::steady_clock::duration::zero();
    } else {
        interval_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
            std::chrono::duration<double>(1.0 / max_requests_per_second));
    }
}

void RateLimiter::acquire() {
    std::chrono::steady_clock::time_point slot;
    {
        std::lock_guard lock(mutex_);
        const auto now = timing_.now();
        if (first_ || next_slot_ < now) {
            first_ = false;
            next_slot_ = now;
        }
        slot = next_slot_;
        next_slot_ += interval_;
    }
    const auto now = timing_.now();
    if (slot > now) timing_.sleep(std::chrono::ceil<Milliseconds>(slot - now));
}

Milliseconds backoff_delay(const RetryPolicy& policy, int attempt, const Response& response) {
    if (auto it = response.headers.find("retry-after"); it != response.headers.end()) {
        try {
            const long seconds = std::stol(it->second);
            if (seconds >= 0) return Milliseconds(seconds * 1000);
        } catch (...) {
            // HTTP-date form is not interpreted; fall back to exponential backoff
        }
    }
    long long delay = policy.backoff_initial.count();
    for (int i = 0; i < attempt && delay < policy.backoff_max.count(); ++i) delay *= 2;
    return Milliseconds(std::min<long long>(delay, policy.backoff_max.count()));
}

Response send_with_retry(Client& client, const Request& request, const RetryPolicy& policy, RateLimiter& limiter,
                         const Timing& timing, const std::string& source_name) {
    auto sleep = timing.sleep ? timing.sleep : std::function<void(Milliseconds)>(&default_sleep);
    for (int attempt = 0;; ++attempt) {
        limiter.acquire();
        Response response = client.send(request);
        if (response.status == 0) {
            throw Error(ErrorCode::SourceUnavailable, "transport failure: " + response.transport_error,
                        {{"source", source_name}, {"url", request.url}});
        }
        const bool throttled = response.status == 429 || response.status == 503;
        if (!throttled) return response;
        const Milliseconds delay = backoff_delay(policy, attempt, response);
        if (attempt >= policy.max_retries) {
            if (response.status == 429) {
                throw Error(ErrorCode::RateLimited, "request rate limited after retries",
                            {{"source", source_name},
                             {"retry_after_ms", std::to_string(delay.count())},
                             {"url", request.url}});
            }
            throw Error(ErrorCode::SourceUnavailable, "service unavailable after retries",
                        {{"source", source_name}, {"status", "503"}, {"url", request.url}});
        }
        sleep(delay);
    }
}

}  // namespace eqr::http
