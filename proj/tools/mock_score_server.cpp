// Minimal score server for protocol tests: answers requests on stdin/stdout
// with either a zero score or the Gaussian score -x / sigma^2.
#include <unistd.h>

#include <cstdio>
#include <cstring>
#include <string>

#include "pls/error.hpp"
#include "pls/protocol.hpp"

using namespace pls::protocol;

int main(int argc, char** argv) {
    bool gaussian = false;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--gaussian") == 0) gaussian = true;
    }
    auto io = fd_transport(STDIN_FILENO, STDOUT_FILENO);
    for (;;) {
        Frame req;
        try {
            req = read_frame(*io);
        } catch (const pls::TransportError& e) {
            const std::string what = e.what();
            if (what.find("closed by peer") != std::string::npos) return 0;
            // the stream is out of sync after a bad header; report and stop
            try {
                write_frame(*io, make_error(what));
            } catch (const pls::Error&) {
            }
            return 1;
        }
        if (req.msg_type != kRequest) {
            write_frame(*io, make_error("expected a request frame"));
            continue;
        }
        if (!(req.sigma > 0.0)) {
            write_frame(*io, make_error("sigma must be positive"));
            continue;
        }
        std::vector<float> out(req.values.size(), 0.0f);
        if (gaussian) {
            const double inv = 1.0 / (req.sigma * req.sigma);
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(-req.values[i] * inv);
        }
        write_frame(*io, make_response(req, std::move(out)));
    }
}
