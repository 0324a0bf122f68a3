#include "outagekit/decompress.hpp"

#include "outagekit/error.hpp"

#include <zlib.h>

#include <cstring>

#ifdef OUTAGEKIT_HAVE_BZ2
// Minimal prototypes for the stable libbz2 1.0 ABI; the distribution
// ships the runtime library without its development header.
extern "C" {
typedef struct {
  char* next_in;
  unsigned int avail_in;
  unsigned int total_in_lo32;
  unsigned int total_in_hi32;
  char* next_out;
  unsigned int avail_out;
  unsigned int total_out_lo32;
  unsigned int total_out_hi32;
  void* state;
  void* (*bzalloc)(void*, int, int);
  void (*bzfree)(void*, void*);
  void* opaque;
} bz_stream;

int BZ2_bzDecompressInit(bz_stream* strm, int verbosity, int small);
int BZ2_bzDecompress(bz_stream* strm);
int BZ2_bzDecompressEnd(bz_stream* strm);
}
#define BZ_OK 0
#define BZ_STREAM_END 4
#endif

namespace outagekit {

Compression sniff_compression(const uint8_t* data, size_t size) {
  if (size >= 2 && data[0] == 0x1f && data[1] == 0x8b)
    return Compression::gzip;
  if (size >= 3 && data[0] == 'B' && data[1] == 'Z' && data[2] == 'h')
    return Compression::bzip2;
  return Compression::none;
}

bool bzip2_supported() {
#ifdef OUTAGEKIT_HAVE_BZ2
  return true;
#else
  return false;
#endif
}

namespace {

std::vector<uint8_t> gunzip(const std::vector<uint8_t>& data) {
  z_stream strm{};
  // 15 window bits + 16 selects gzip framing.
  if (inflateInit2(&strm, 15 + 16) != Z_OK)
    throw Error("gzip: inflateInit failed");
  std::vector<uint8_t> out;
  out.reserve(data.size() * 4);
  std::vector<uint8_t> chunk(1 << 16);
  strm.next_in = const_cast<Bytef*>(data.data());
  strm.avail_in = static_cast<uInt>(data.size());
  int rc = Z_OK;
  do {
    strm.next_out = chunk.data();
    strm.avail_out = static_cast<uInt>(chunk.size());
    rc = inflate(&strm, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&strm);
      throw Error("gzip: corrupt stream (zlib rc " + std::to_string(rc) + ")");
    }
    out.insert(out.end(), chunk.data(), chunk.data() + (chunk.size() - strm.avail_out));
    // A gzip file may concatenate members; restart inflate on the remainder.
    if (rc == Z_STREAM_END && strm.avail_in > 0) {
      if (inflateReset2(&strm, 15 + 16) != Z_OK) {
        inflateEnd(&strm);
        throw Error("gzip: reset failed on concatenated member");
      }
      rc = Z_OK;
    }
  } while (rc != Z_STREAM_END && (strm.avail_in > 0 || strm.avail_out == 0));
  inflateEnd(&strm);
  if (rc != Z_STREAM_END)
    throw Error("gzip: truncated stream");
  return out;
}

#ifdef OUTAGEKIT_HAVE_BZ2
std::vector<uint8_t> bunzip2(const std::vector<uint8_t>& data) {
  bz_stream strm{};
  if (BZ2_bzDecompressInit(&strm, 0, 0) != BZ_OK)
    throw Error("bzip2: init failed");
  std::vector<uint8_t> out;
  out.reserve(data.size() * 4);
  std::vector<char> chunk(1 << 16);
  strm.next_in = const_cast<char*>(reinterpret_cast<const char*>(data.data()));
  strm.avail_in = static_cast<unsigned int>(data.size());
  int rc = BZ_OK;
  do {
    strm.next_out = chunk.data();
    strm.avail_out = static_cast<unsigned int>(chunk.size());
    rc = BZ2_bzDecompress(&strm);
    if (rc != BZ_OK && rc != BZ_STREAM_END) {
      BZ2_bzDecompressEnd(&strm);
      throw Error("bzip2: corrupt stream (rc " + std::to_string(rc) + ")");
    }
    out.insert(out.end(), chunk.data(), chunk.data() + (chunk.size() - strm.avail_out));
  } while (rc != BZ_STREAM_END && (strm.avail_in > 0 || strm.avail_out == 0));
  BZ2_bzDecompressEnd(&strm);
  if (rc != BZ_STREAM_END)
    throw Error("bzip2: truncated stream");
  return out;
}
#endif

} // namespace

std::vector<uint8_t> decompress_auto(const std::vector<uint8_t>& data) {
  switch (sniff_compression(data.data(), data.size())) {
    case Compression::gzip:
      return gunzip(data);
    case Compression::bzip2:
#ifdef OUTAGEKIT_HAVE_BZ2
      return bunzip2(data);
#else
      throw Error("bzip2 input detected but bzip2 support is not built in");
#endif
    case Compression::none:
      return data;
  }
  return data;
}

} // namespace outagekit
