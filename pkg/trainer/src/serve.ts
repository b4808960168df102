/** Serve a trained checkpoint over stdio or TCP. */
import * as fs from "node:fs";
import * as net from "node:net";
import * as path from "node:path";
import { Checkpoint, fromCheckpoint, TransformerClassifier } from "./model";
import { createSession, handshakeLine, LineSplitter } from "./protocol";
import { Vocab } from "./tokenizer";

export interface LoadedModel {
  model: TransformerClassifier;
  vocab: Vocab;
}

export function loadModelDir(dir: string): LoadedModel {
  const file = path.join(dir, "model.json");
  if (!fs.existsSync(file)) throw new Error(`model directory has no model.json: ${dir}`);
  const checkpoint = JSON.parse(fs.readFileSync(file, "utf-8")) as Checkpoint;
  return fromCheckpoint(checkpoint);
}

export const BACKEND_ID = "transformer-trainer";

export function serveStdio(loaded: LoadedModel): void {
  const write = (line: string) => process.stdout.write(line + "\n");
  write(handshakeLine(BACKEND_ID));
  const session = createSession({
    write,
    close: () => process.exit(0),
    scoreText: (text) => loaded.model.pPositive(loaded.vocab, text),
  });
  const splitter = new LineSplitter(session);
  process.stdin.on("data", (chunk) => splitter.push(chunk));
  process.stdin.on("end", () => process.exit(0));
}

export function serveTcp(loaded: LoadedModel, host: string, port: number): net.Server {
  const server = net.createServer((socket) => {
    const write = (line: string) => socket.write(line + "\n");
    write(handshakeLine(BACKEND_ID));
    const session = createSession({
      write,
      close: () => socket.end(),
      scoreText: (text) => loaded.model.pPositive(loaded.vocab, text),
    });
    const splitter = new LineSplitter(session);
    socket.on("data", (chunk) => splitter.push(chunk));
    socket.on("error", () => socket.destroy());
  });
  server.listen(port, host);
  return server;
}
