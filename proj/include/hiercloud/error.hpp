#pragma once

#include <stdexcept>
#include <string>

namespace hiercloud {

// All library failures (parse, validation, shape, I/O) throw this type.
// Messages carry the offending class name, file position, or shape so the
// CLI can print them verbatim.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

[[noreturn]] inline void fail(const std::string& what) { throw Error(what); }

}  // namespace hiercloud
