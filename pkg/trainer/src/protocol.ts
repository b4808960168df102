/**
 * solsent-clf/1 wire protocol: line-delimited JSON over a byte stream.
 *
 * Server side: send one handshake line, then serve batches. A batch is a
 * run of {"id","text"} lines closed by {"end_batch":true}; the response
 * is one {"id","p_positive"} line per item plus an end_batch line. A
 * malformed request line gets a protocol-error response and the
 * connection closes.
 */

export const PROTOCOL_NAME = "solsent-clf/1";

export interface ProtocolHooks {
  write: (line: string) => void;
  close: () => void;
  scoreText: (text: string) => number;
}

export function handshakeLine(backendId: string): string {
  return JSON.stringify({ protocol: PROTOCOL_NAME, backend_id: backendId });
}

/** Incremental line splitter feeding complete lines to the handler. */
export class LineSplitter {
  private buffer = "";

  constructor(private readonly onLine: (line: string) => void) {}

  push(chunk: string | Buffer): void {
    this.buffer += chunk.toString();
    for (;;) {
      const idx = this.buffer.indexOf("\n");
      if (idx === -1) break;
      const line = this.buffer.slice(0, idx);
      this.buffer = this.buffer.slice(idx + 1);
      if (line.trim()) this.onLine(line);
    }
  }
}

/** One connection's batch loop; returns the line handler to pump. */
export function createSession(hooks: ProtocolHooks): (line: string) => void {
  let batch: Array<{ id: string; text: string }> = [];
  return (line: string) => {
    let request: Record<string, unknown>;
    try {
      request = JSON.parse(line);
    } catch {
      hooks.write(JSON.stringify({ error: "protocol", detail: "request line is not JSON" }));
      hooks.close();
      return;
    }
    if (request.end_batch) {
      for (const item of batch) {
        hooks.write(JSON.stringify({ id: item.id, p_positive: hooks.scoreText(item.text) }));
      }
      hooks.write(JSON.stringify({ end_batch: true }));
      batch = [];
      return;
    }
    if (typeof request.id !== "string" || typeof request.text !== "string") {
      hooks.write(
        JSON.stringify({ error: "protocol", detail: "request needs string id and text" })
      );
      hooks.close();
      return;
    }
    batch.push({ id: request.id, text: request.text });
  };
}
