pub const RUNTIME: &str = r#"
#define DED_FAULT_OVERFLOW 1
#define DED_FAULT_VALUE 2

#ifdef __cplusplus
extern "C" {
#endif
/* Called when a fact cannot be stored. `detail` is the number of bytes in
   use for DED_FAULT_OVERFLOW and the offending value for DED_FAULT_VALUE.
   Replace this definition to report faults; the default halts. */
void ded_fault(uint8_t kind, uint8_t tag, uint32_t detail) __attribute__((weak));
#ifdef DED_HOST
void ded_host_after_deduction(void);
#endif
#ifdef __cplusplus
}
#endif

void ded_fault(uint8_t kind, uint8_t tag, uint32_t detail) {
    (void)kind;
    (void)tag;
    (void)detail;
    for (;;) {
    }
}

/* One spare zero byte after each buffer ends every scan. */
uint8_t ded_buffer_a[DED_BUFFER_SIZE + 1];
uint8_t ded_buffer_b[DED_BUFFER_SIZE + 1];
uint8_t *curr_buff = ded_buffer_a;
uint8_t *next_buff = ded_buffer_b;

static inline uint8_t ded_read_byte(const uint8_t *p) {
    return p[0];
}

static inline int16_t ded_read_int(const uint8_t *p) {
    uint16_t raw = (uint16_t)(((uint16_t)p[0] << 8) | p[1]);
    int16_t mag = (int16_t)(raw & 0x7fff);
    return (raw & 0x8000) ? (int16_t)-mag : mag;
}

static inline uint32_t ded_read_ulong(const uint8_t *p) {
    return ((uint32_t)p[0] << 24) | ((uint32_t)p[1] << 16) | ((uint32_t)p[2] << 8) | (uint32_t)p[3];
}

static inline void ded_write_byte(uint8_t *p, uint8_t v) {
    p[0] = v;
}

static inline void ded_write_int(uint8_t *p, int16_t v) {
    uint16_t raw = v < 0 ? (uint16_t)(0x8000 | (uint16_t)-v) : (uint16_t)v;
    p[0] = (uint8_t)(raw >> 8);
    p[1] = (uint8_t)raw;
}

static inline void ded_write_ulong(uint8_t *p, uint32_t v) {
    p[0] = (uint8_t)(v >> 24);
    p[1] = (uint8_t)(v >> 16);
    p[2] = (uint8_t)(v >> 8);
    p[3] = (uint8_t)v;
}

static inline int16_t ded_as_s16(uint16_t v) {
    return v < 0x8000u ? (int16_t)v : (int16_t)-(int16_t)(uint16_t)(0xffffu - v) - 1;
}

static inline int16_t ded_add16(int16_t a, int16_t b) {
    return ded_as_s16((uint16_t)((uint16_t)a + (uint16_t)b));
}

static inline int16_t ded_sub16(int16_t a, int16_t b) {
    return ded_as_s16((uint16_t)((uint16_t)a - (uint16_t)b));
}

static inline int16_t ded_mul16(int16_t a, int16_t b) {
    return ded_as_s16((uint16_t)((uint32_t)(uint16_t)a * (uint32_t)(uint16_t)b));
}

/* Next fact with `tag` at or after `from`, or 0. */
static inline uint8_t *ded_find(uint8_t *from, uint8_t tag) {
    while (*from != 0) {
        if (*from == tag) {
            return from;
        }
        from += ded_sizes[*from];
    }
    return 0;
}

static inline uint16_t ded_used(const uint8_t *buf) {
    uint16_t used = 0;
    while (buf[used] != 0) {
        used = (uint16_t)(used + ded_sizes[buf[used]]);
    }
    return used;
}

/* Space for one fact of `tag` at the end of `buf`, or 0 after a fault. */
static inline uint8_t *ded_reserve(uint8_t *buf, uint8_t tag) {
    uint16_t used = ded_used(buf);
    if ((uint32_t)used + ded_sizes[tag] > DED_BUFFER_SIZE) {
        ded_fault(DED_FAULT_OVERFLOW, tag, used);
        return 0;
    }
    return buf + used;
}

static inline void clear_buffer(uint8_t *buf) {
    memset(buf, 0, DED_BUFFER_SIZE + 1);
}

static inline void switch_buffers(void) {
    uint8_t *t = curr_buff;
    curr_buff = next_buff;
    next_buff = t;
    clear_buffer(next_buff);
}

#ifdef DED_HOST
#include <stdio.h>

static inline int ded_fact_cmp(const uint8_t *a, const uint8_t *b) {
    uint8_t sa = ded_sizes[a[0]];
    uint8_t sb = ded_sizes[b[0]];
    int c = memcmp(a, b, sa < sb ? sa : sb);
    if (c != 0) {
        return c;
    }
    return (int)sa - (int)sb;
}

/* Prints the facts of `buf` as `p(1,2), q` ordered by their stored bytes. */
void ded_dump_buffer(const uint8_t *buf, FILE *out) {
    static const uint8_t *facts[DED_BUFFER_SIZE];
    uint16_t n = 0;
    uint16_t pos = 0;
    uint16_t i;
    while (buf[pos] != 0) {
        const uint8_t *f = buf + pos;
        uint16_t k = n++;
        while (k > 0 && ded_fact_cmp(facts[k - 1], f) > 0) {
            facts[k] = facts[k - 1];
            k--;
        }
        facts[k] = f;
        pos = (uint16_t)(pos + ded_sizes[buf[pos]]);
    }
    for (i = 0; i < n; i++) {
        const uint8_t *f = facts[i];
        const char *t = ded_arg_types[f[0]];
        const uint8_t *p = f + 1;
        if (i > 0) {
            fputs(", ", out);
        }
        fputs(ded_names[f[0]], out);
        if (*t != 0) {
            fputc('(', out);
            for (; *t != 0; t++) {
                if (*t == 'b') {
                    fprintf(out, "%u", (unsigned)ded_read_byte(p));
                    p += 1;
                } else if (*t == 'i') {
                    fprintf(out, "%d", (int)ded_read_int(p));
                    p += 2;
                } else {
                    fprintf(out, "%lu", (unsigned long)ded_read_ulong(p));
                    p += 4;
                }
                if (t[1] != 0) {
                    fputc(',', out);
                }
            }
            fputc(')', out);
        }
    }
}
#endif
"#;
