#include "eqr/common/files.hpp"

#include "eqr/common/error.hpp"

#include <unistd.h>

#include <atomic>
#include <fstream>
#include <sstream>
#include <system_error>
#include <thread>

namespace eqr {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::StorageFailure, "cannot open file for reading", {{"path", path.string()}});
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view bytes) {
    static std::atomic<unsigned long> counter{0};
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        if (ec) {
            throw Error(ErrorCode::StorageFailure, "cannot create directory",
                        {{"path", path.parent_path().string()}, {"reason", ec.message()}});
        }
    }
    std::ostringstream tmp_name;
    tmp_name << '.' << path.filename().string() << ".tmp." << ::getpid() << '.'
             << std::hash<std::thread::id>{}(std::this_thread::get_id()) << '.' << counter++;
    const fs::path tmp = path.parent_path() / tmp_name.str();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(ErrorCode::StorageFailure, "cannot open temporary file", {{"path", tmp.string()}});
        }
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            fs::remove(tmp, ec);
            throw Error(ErrorCode::StorageFailure, "short write", {{"path", tmp.string()}});
        }
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(ErrorCode::StorageFailure, "atomic rename failed", {{"path", path.string()}});
    }
}

}  // namespace eqr
