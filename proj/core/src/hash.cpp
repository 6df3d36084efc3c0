#include "surveylm/hash.hpp"

#include <openssl/evp.h>

#include "surveylm/error.hpp"

namespace surveylm {

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int digest_len = 0;
    if (!EVP_Digest(data.data(), data.size(), digest, &digest_len, EVP_sha256(), nullptr)) {
        throw Error("sha256: digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(digest_len * 2);
    for (unsigned int i = 0; i < digest_len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

}  // namespace surveylm
