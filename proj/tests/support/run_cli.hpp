#pragma once

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

// Runs the installed binary through the shell, capturing the two streams
// separately.  Slow but faithful: the exit-code contract is part of the
// product surface.
namespace testcli {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// env holds zero or more shell-safe NAME=value assignments, e.g.
// "OSFORMA_QUANTUM=7".
inline CliResult run_cli(const std::string& args, const std::string& env = "") {
    static int serial = 0;
    std::string base = "/tmp/osforma_cli_" + std::to_string(++serial);
    std::string out_path = base + ".out";
    std::string err_path = base + ".err";
    std::string cmd = (env.empty() ? "" : "env " + env + " ") + OSFORMA_CLI_PATH +
                      " " + args + " >" + out_path + " 2>" + err_path;
    int status = std::system(cmd.c_str());
    CliResult r;
    r.code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    std::remove(out_path.c_str());
    std::remove(err_path.c_str());
    return r;
}

} // namespace testcli
