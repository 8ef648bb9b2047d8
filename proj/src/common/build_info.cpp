#include "eqr/common/build_info.hpp"

#include <cstdlib>

namespace eqr {

std::string_view engine_version() { return EQR_VERSION; }

std::filesystem::path default_data_dir() {
    if (const char* env = std::getenv("EQR_DATA_DIR"); env && *env) return env;
    return EQR_DEFAULT_DATA_DIR;
}

}  // namespace eqr
