/*
 * Compacting heap property test at the 24KB micro profile.
 *
 * 1000 randomized alloc/drop schedules against a shadow model:
 *   - live object payloads are byte-identical after every compaction
 *   - free space is non-decreasing across compactions
 *   - an allocation that fits (live bytes + headers + request <= capacity)
 *     never traps; the trap-on-exceed side lives in test_traps.
 */
#include "olympus.h"

#define NSLOTS 24
#define SCHEDULES 1000
#define OPS 60

static uint64_t rng_state;

static uint32_t rng(void) {
    rng_state ^= rng_state << 13;
    rng_state ^= rng_state >> 7;
    rng_state ^= rng_state << 17;
    return (uint32_t)(rng_state & 0xffffffffu);
}

typedef struct {
    int live;
    uint8_t kind;
    uint32_t len;
    uint32_t seed;
} shadow_t;

static shadow_t shadow[NSLOTS];
static int failures;

#define CHECK(cond, msg)                                                      \
    do {                                                                      \
        if (!(cond)) {                                                        \
            printf("FAIL: %s (line %d)\n", msg, __LINE__);                    \
            failures++;                                                       \
        }                                                                     \
    } while (0)

static size_t payload_bytes(uint8_t kind, uint32_t len) {
    if (kind == OLY_K_VEC)
        return (size_t)len * sizeof(olym_int);
    if (kind == OLY_K_STR)
        return (size_t)len + 1;
    return 2 * sizeof(olym_real);
}

static size_t obj_bytes(uint8_t kind, uint32_t len) {
    return 16 + ((payload_bytes(kind, len) + 7u) & ~(size_t)7u);
}

static size_t live_bytes(void) {
    size_t total = 0;
    for (int k = 0; k < NSLOTS; k++)
        if (shadow[k].live)
            total += obj_bytes(shadow[k].kind, shadow[k].len);
    return total;
}

static void fill(olym_handle h, uint8_t kind, uint32_t len, uint32_t seed) {
    if (kind == OLY_K_VEC) {
        olym_int *p = (olym_int *)olym_payload(h);
        for (uint32_t k = 0; k < len; k++)
            p[k] = (olym_int)(seed * 2654435761u + k);
    } else if (kind == OLY_K_STR) {
        char *p = (char *)olym_payload(h);
        for (uint32_t k = 0; k < len; k++)
            p[k] = (char)('a' + ((seed + k) % 26));
        p[len] = '\0';
    } else {
        olym_real *p = (olym_real *)olym_payload(h);
        p[0] = (olym_real)seed;
        p[1] = (olym_real)(seed ^ 0x5555);
    }
}

static int verify(olym_handle h, uint8_t kind, uint32_t len, uint32_t seed) {
    olym_header *hd = olym_hdr(h);
    if (hd->kind != kind || hd->len != (kind == OLY_K_CPLX ? 2 : len))
        return 0;
    if (kind == OLY_K_VEC) {
        olym_int *p = (olym_int *)olym_payload(h);
        for (uint32_t k = 0; k < len; k++)
            if (p[k] != (olym_int)(seed * 2654435761u + k))
                return 0;
    } else if (kind == OLY_K_STR) {
        char *p = (char *)olym_payload(h);
        for (uint32_t k = 0; k < len; k++)
            if (p[k] != (char)('a' + ((seed + k) % 26)))
                return 0;
        if (p[len] != '\0')
            return 0;
    } else {
        olym_real *p = (olym_real *)olym_payload(h);
        if (p[0] != (olym_real)seed || p[1] != (olym_real)(seed ^ 0x5555))
            return 0;
    }
    return 1;
}

static void verify_all(olym_slot *frame, const char *when) {
    for (int k = 0; k < NSLOTS; k++) {
        if (shadow[k].live) {
            if (!verify(frame[k].h, shadow[k].kind, shadow[k].len,
                        shadow[k].seed)) {
                printf("FAIL: live object corrupted (%s, slot %d)\n", when, k);
                failures++;
            }
        }
    }
}

void olympus_main(void) {}

int main(void) {
    static const char map[NSLOTS + 1] = "hhhhhhhhhhhhhhhhhhhhhhhh";
    olym_slot _oly_frame[NSLOTS];
    olym_guard _oly_g;
    olym_enter(&_oly_g, _oly_frame, NSLOTS, 0, map);

    olym_stats_t st;
    size_t total_allocs = 0, skipped = 0;

    for (int s = 0; s < SCHEDULES; s++) {
        rng_state = (uint64_t)s * 2654435761u + 12345u;
        for (int op = 0; op < OPS; op++) {
            uint32_t r = rng();
            int slot = (int)(r % NSLOTS);
            if ((r >> 8) & 1) {
                uint8_t kind = (uint8_t)((r >> 9) % 3 == 0   ? OLY_K_VEC
                                         : (r >> 9) % 3 == 1 ? OLY_K_STR
                                                             : OLY_K_CPLX);
                uint32_t len = (r >> 16) % 1200;
                if (kind == OLY_K_CPLX)
                    len = 2;
                /* the old slot value stays rooted until overwritten */
                if (live_bytes() + obj_bytes(kind, len) > OLYMPUS_HEAP_BYTES) {
                    skipped++;
                    continue;
                }
                olym_handle h;
                if (kind == OLY_K_VEC)
                    h = olym_alloc(OLY_K_VEC, len, sizeof(olym_int), 0);
                else if (kind == OLY_K_STR)
                    h = olym_alloc(OLY_K_STR, len, 1, 0);
                else
                    h = olym_mkc(0, 0);
                fill(h, kind, len, r);
                _oly_frame[slot].h = h;
                shadow[slot].live = 1;
                shadow[slot].kind = kind;
                shadow[slot].len = len;
                shadow[slot].seed = r;
                olym_ts_restore(_oly_g.tmark); /* statement boundary */
                total_allocs++;
            } else {
                _oly_frame[slot].h = 0;
                shadow[slot].live = 0;
            }
        }
        olym_heap_stats(&st);
        size_t used_before = st.used;
        olym_compact_now();
        olym_heap_stats(&st);
        CHECK(st.used <= used_before, "free space decreased across compaction");
        CHECK(st.used == live_bytes(), "post-compaction usage != live bytes");
        verify_all(_oly_frame, "after compaction");
    }

    olym_heap_stats(&st);
    printf("schedules=%d allocs=%zu skipped=%zu collections=%zu freed=%zu\n",
           SCHEDULES, total_allocs, skipped, st.collections, st.freed_bytes);
    CHECK(st.collections >= SCHEDULES, "expected one compaction per schedule");
    olym_leave(&_oly_g);
    if (failures) {
        printf("test_heap: %d failure(s)\n", failures);
        return 1;
    }
    printf("test_heap: OK\n");
    return 0;
}
