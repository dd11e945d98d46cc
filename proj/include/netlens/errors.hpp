#pragma once

#include <stdexcept>
#include <string>

namespace netlens {

enum class errc {
    invalid_threshold,
    empty_input,
    empty_month,
    empty_day,
    empty_seed,
    no_valid_entries,
    series_too_short,
    no_tokens,
    no_download,
    ambiguous_value,
    no_header,
    empty_table,
    not_a_number,
    unknown_unit,
    duplicate_month,
    config_error,
    auth_error,
    transient_exhausted,
    malformed_response,
    image_unavailable,
    fixture_miss,
    spec_infeasible,
    provider_error,
};

const char* errc_name(errc c);

/// Exception carrying a machine-checkable error code.
class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

}  // namespace netlens
