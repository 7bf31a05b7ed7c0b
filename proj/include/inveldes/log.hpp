#pragma once

#include <string>

namespace inveldes {

/// Log verbosity from INVELDES_LOG (error | info | debug); defaults to info.
int log_level();

void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace inveldes
