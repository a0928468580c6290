#pragma once

#include <functional>
#include <memory>

#include "lectern/gateway/gateway.hpp"

namespace lectern::mock {

// Deterministic offline LLM. Answers every pipeline purpose with a
// schema-valid document derived only from the request's structured input,
// so the same request always yields the same bytes.
std::shared_ptr<gateway::Transport> make_template_llm();

// Transport backed by a callable; handy for fault injection.
class FunctionTransport final : public gateway::Transport {
public:
    using Fn = std::function<std::string(const gateway::ServiceRequest&)>;
    explicit FunctionTransport(Fn fn) : fn_(std::move(fn)) {}
    std::string send(const gateway::ServiceRequest& request) override { return fn_(request); }

private:
    Fn fn_;
};

}  // namespace lectern::mock
