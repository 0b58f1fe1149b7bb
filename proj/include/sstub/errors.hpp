#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sstub {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Character range does not fit the file it is supposed to index.
class RangeError : public Error {
public:
    RangeError(const std::string& what, std::size_t file_length, std::size_t start, std::size_t length)
        : Error(what)
        , file_length(file_length)
        , start(start)
        , length(length)
    {
    }

    std::size_t file_length;
    std::size_t start;
    std::size_t length;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what)
        , line(line)
    {
    }

    std::size_t line;
};

class IngestError : public Error {
public:
    using Error::Error;
};

class NotFound : public Error {
public:
    using Error::Error;
};

class ToolError : public Error {
public:
    using Error::Error;
};

class RepoUnavailable : public Error {
public:
    using Error::Error;
};

class EmptyGroup : public Error {
public:
    using Error::Error;
};

class AnalyzerError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace sstub
