//! A small pull reader for the XML subset OSM files use: elements,
//! attributes, character references, comments, processing instructions
//! and a DOCTYPE. Text content is skipped. Nesting is checked.

use super::GeodataError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Event {
    Start {
        name: String,
        attrs: Vec<(String, String)>,
        empty: bool,
        position: usize,
    },
    End {
        name: String,
    },
}

pub(crate) struct Reader<'a> {
    src: &'a str,
    pos: usize,
    open: Vec<String>,
    seen_root: bool,
}

fn err(position: usize, message: impl Into<String>) -> GeodataError {
    GeodataError::MalformedXml {
        position,
        message: message.into(),
    }
}

impl<'a> Reader<'a> {
    pub fn new(bytes: &'a [u8]) -> Result<Self, GeodataError> {
        let src = std::str::from_utf8(bytes)
            .map_err(|e| err(e.valid_up_to(), "invalid UTF-8"))?;
        let src = src.strip_prefix('\u{feff}').unwrap_or(src);
        Ok(Self {
            src,
            pos: 0,
            open: Vec::new(),
            seen_root: false,
        })
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_until(&mut self, pat: &str, what: &str) -> Result<(), GeodataError> {
        match self.rest().find(pat) {
            Some(i) => {
                self.pos += i + pat.len();
                Ok(())
            }
            None => Err(err(self.pos, format!("unterminated {what}"))),
        }
    }

    pub fn next_event(&mut self) -> Result<Option<Event>, GeodataError> {
        loop {
            // Text between markup.
            let rest = self.rest();
            let Some(lt) = rest.find('<') else {
                if !rest.trim().is_empty() && self.open.is_empty() {
                    return Err(err(self.pos, "content outside the root element"));
                }
                self.pos = self.src.len();
                if let Some(name) = self.open.last() {
                    return Err(err(self.pos, format!("unexpected end of input inside <{name}>")));
                }
                if !self.seen_root {
                    return Err(err(self.pos, "no root element"));
                }
                return Ok(None);
            };
            if self.open.is_empty() && !rest[..lt].trim().is_empty() {
                return Err(err(self.pos, "content outside the root element"));
            }
            self.pos += lt;
            let rest = self.rest();
            if rest.starts_with("<!--") {
                self.skip_until("-->", "comment")?;
            } else if rest.starts_with("<?") {
                self.skip_until("?>", "processing instruction")?;
            } else if rest.starts_with("<![CDATA[") {
                self.skip_until("]]>", "CDATA section")?;
            } else if rest.starts_with("<!") {
                self.skip_until(">", "declaration")?;
            } else if rest.starts_with("</") {
                return self.end_tag().map(Some);
            } else {
                return self.start_tag().map(Some);
            }
        }
    }

    fn end_tag(&mut self) -> Result<Event, GeodataError> {
        let start = self.pos;
        self.pos += 2;
        let name = self.name()?;
        self.skip_ws();
        if !self.rest().starts_with('>') {
            return Err(err(self.pos, "expected '>'"));
        }
        self.pos += 1;
        match self.open.pop() {
            Some(open) if open == name => Ok(Event::End { name }),
            Some(open) => Err(err(start, format!("</{name}> does not match <{open}>"))),
            None => Err(err(start, format!("unexpected </{name}>"))),
        }
    }

    fn start_tag(&mut self) -> Result<Event, GeodataError> {
        let position = self.pos;
        if self.open.is_empty() && self.seen_root {
            return Err(err(position, "second root element"));
        }
        self.pos += 1;
        let name = self.name()?;
        let mut attrs: Vec<(String, String)> = Vec::new();
        loop {
            let had_ws = self.skip_ws();
            let rest = self.rest();
            if rest.starts_with("/>") {
                self.pos += 2;
                self.seen_root = true;
                return Ok(Event::Start {
                    name,
                    attrs,
                    empty: true,
                    position,
                });
            }
            if rest.starts_with('>') {
                self.pos += 1;
                self.seen_root = true;
                self.open.push(name.clone());
                return Ok(Event::Start {
                    name,
                    attrs,
                    empty: false,
                    position,
                });
            }
            if rest.is_empty() {
                return Err(err(self.pos, format!("unterminated <{name}>")));
            }
            if !had_ws {
                return Err(err(self.pos, "expected whitespace before attribute"));
            }
            let key_pos = self.pos;
            let key = self.name()?;
            self.skip_ws();
            if !self.rest().starts_with('=') {
                return Err(err(self.pos, format!("expected '=' after attribute {key}")));
            }
            self.pos += 1;
            self.skip_ws();
            let value = self.quoted()?;
            if attrs.iter().any(|(k, _)| *k == key) {
                return Err(err(key_pos, format!("duplicate attribute {key}")));
            }
            attrs.push((key, value));
        }
    }

    fn skip_ws(&mut self) -> bool {
        let rest = self.rest();
        let trimmed = rest.trim_start_matches([' ', '\t', '\r', '\n']);
        self.pos += rest.len() - trimmed.len();
        rest.len() != trimmed.len()
    }

    fn name(&mut self) -> Result<String, GeodataError> {
        let rest = self.rest();
        let end = rest
            .find(|c: char| !(c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | ':')))
            .unwrap_or(rest.len());
        if end == 0 {
            return Err(err(self.pos, "expected a name"));
        }
        self.pos += end;
        Ok(rest[..end].to_owned())
    }

    fn quoted(&mut self) -> Result<String, GeodataError> {
        let start = self.pos;
        let rest = self.rest();
        let quote = match rest.chars().next() {
            Some(q @ ('"' | '\'')) => q,
            _ => return Err(err(start, "expected quoted attribute value")),
        };
        let body = &rest[1..];
        let Some(end) = body.find(quote) else {
            return Err(err(start, "unterminated attribute value"));
        };
        let raw = &body[..end];
        if let Some(i) = raw.find('<') {
            return Err(err(start + 1 + i, "'<' in attribute value"));
        }
        self.pos += end + 2;
        unescape(raw, start + 1)
    }
}

fn unescape(raw: &str, base: usize) -> Result<String, GeodataError> {
    if !raw.contains('&') {
        return Ok(raw.to_owned());
    }
    let mut out = String::with_capacity(raw.len());
    let mut i = 0;
    while let Some(amp) = raw[i..].find('&') {
        out.push_str(&raw[i..i + amp]);
        let at = i + amp;
        let Some(semi) = raw[at..].find(';') else {
            return Err(err(base + at, "unterminated entity"));
        };
        let entity = &raw[at + 1..at + semi];
        let ch = match entity {
            "amp" => '&',
            "lt" => '<',
            "gt" => '>',
            "quot" => '"',
            "apos" => '\'',
            _ => {
                let code = if let Some(hex) = entity.strip_prefix("#x") {
                    u32::from_str_radix(hex, 16).ok()
                } else if let Some(dec) = entity.strip_prefix('#') {
                    dec.parse::<u32>().ok()
                } else {
                    None
                };
                code.and_then(char::from_u32)
                    .ok_or_else(|| err(base + at, format!("unknown entity &{entity};")))?
            }
        };
        out.push(ch);
        i = at + semi + 1;
    }
    out.push_str(&raw[i..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn events(src: &str) -> Result<Vec<Event>, GeodataError> {
        let mut r = Reader::new(src.as_bytes())?;
        let mut out = Vec::new();
        while let Some(e) = r.next_event()? {
            out.push(e);
        }
        Ok(out)
    }

    #[test]
    fn reads_nested_elements_and_entities() {
        let ev = events(
            "<?xml version='1.0'?>\n<!-- c --><osm a=\"1\"><tag k='name' v='A &amp; B &#x10D;'/></osm>",
        )
        .unwrap();
        assert_eq!(ev.len(), 3);
        match &ev[1] {
            Event::Start { name, attrs, empty, .. } => {
                assert_eq!(name, "tag");
                assert!(*empty);
                assert_eq!(attrs[1].1, "A & B č");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mismatched_end_tag_reports_position() {
        let e = events("<osm><node></way></osm>").unwrap_err();
        assert_eq!(
            e,
            GeodataError::MalformedXml {
                position: 11,
                message: "</way> does not match <node>".into()
            }
        );
    }

    #[test]
    fn truncated_input_is_malformed() {
        assert!(matches!(
            events("<osm><node id='1'"),
            Err(GeodataError::MalformedXml { .. })
        ));
        assert!(matches!(events("<osm>"), Err(GeodataError::MalformedXml { .. })));
        assert!(matches!(events(""), Err(GeodataError::MalformedXml { .. })));
    }
}
