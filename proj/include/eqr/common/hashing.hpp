#pragma once

#include <string>
#include <string_view>

namespace eqr {

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

/// Incremental hasher that frames each part with its length, so that
/// ("ab","c") and ("a","bc") produce different digests.
class HashBuilder {
public:
    HashBuilder& add(std::string_view part);
    std::string hex() const;

private:
    std::string buffer_;
};

}  // namespace eqr
