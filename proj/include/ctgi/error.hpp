#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ctgi {

enum class Errc {
    ZeroVector,
    InvalidEmbedding,
    DimMismatch,
    EmptyGallery,
    DuplicateId,
    MissingRelevance,
    OutOfRange,
    InvalidSpec,
    RowMismatch,
    ParseError,
    DimInconsistent,
    IOError,
    InvalidMessage,
    BackendUnreachable,
    BackendRejected,
    ScriptExhausted,
    ReplayMismatch,
    EmptyReply,
    NoKeptTurns,
    ItemSetMismatch,
    UnknownImage,
    SchemaTooSmall,
    InvalidSchema,
    IdMismatch,
    UsageError,
};

std::string_view errc_name(Errc code) noexcept;

/// Single exception type for every domain failure. `what()` reads
/// "<Name>: <detail>" so the CLI can surface the error name directly.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& detail);

    Errc code() const noexcept { return code_; }
    std::string_view name() const noexcept { return errc_name(code_); }
    const std::string& detail() const noexcept { return detail_; }

private:
    Errc code_;
    std::string detail_;
};

} // namespace ctgi
