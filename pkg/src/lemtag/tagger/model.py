"""Network definitions: a shared sentence-contextual encoder, linear
classification heads for POS/morph tasks and an attention-equipped
character decoder for lemma generation.

Words are embedded by running a bidirectional LSTM over their characters
and concatenating the final states of both directions; a second
bidirectional LSTM over the word vectors provides sentence context.
"""

from __future__ import annotations

import torch
from torch import nn
from torch.nn.utils.rnn import pack_padded_sequence, pad_packed_sequence

from .vocab import BOS_IDX, EOS_IDX, PAD_IDX, UNK_IDX


class SentenceEncoder(nn.Module):
    def __init__(
        self,
        n_chars: int,
        cemb_size: int,
        cemb_layers: int,
        hidden_size: int,
        dropout: float,
    ):
        super().__init__()
        if cemb_size % 2:
            raise ValueError("cemb_size must be even (split across directions)")
        self.char_emb = nn.Embedding(n_chars, cemb_size, padding_idx=PAD_IDX)
        self.char_rnn = nn.LSTM(
            cemb_size,
            cemb_size // 2,
            num_layers=cemb_layers,
            bidirectional=True,
            batch_first=True,
        )
        self.context_rnn = nn.LSTM(
            cemb_size, hidden_size, bidirectional=True, batch_first=True
        )
        self.dropout = nn.Dropout(dropout)

    def forward(
        self,
        chars: torch.Tensor,
        char_lengths: torch.Tensor,
        sent_lengths: list[int],
    ) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        """chars: (W, T) ids of every word in the batch, in sentence order;
        returns per-character states (W, T, cemb), word vectors (W, cemb)
        and contextual word vectors (W, 2 * hidden)."""
        emb = self.dropout(self.char_emb(chars))
        packed = pack_padded_sequence(
            emb, char_lengths.cpu(), batch_first=True, enforce_sorted=False
        )
        states, (h_n, _) = self.char_rnn(packed)
        char_states, _ = pad_packed_sequence(
            states, batch_first=True, total_length=chars.shape[1]
        )
        word_vecs = torch.cat([h_n[-2], h_n[-1]], dim=-1)

        max_len = max(sent_lengths)
        by_sentence = word_vecs.new_zeros(len(sent_lengths), max_len, word_vecs.shape[-1])
        offset = 0
        for b, n in enumerate(sent_lengths):
            by_sentence[b, :n] = word_vecs[offset : offset + n]
            offset += n
        packed = pack_padded_sequence(
            self.dropout(by_sentence),
            torch.as_tensor(sent_lengths),
            batch_first=True,
            enforce_sorted=False,
        )
        ctx, _ = self.context_rnn(packed)
        ctx, _ = pad_packed_sequence(ctx, batch_first=True, total_length=max_len)
        flat_ctx = torch.cat([ctx[b, :n] for b, n in enumerate(sent_lengths)], dim=0)
        return char_states, word_vecs, flat_ctx


class TagClassifier(nn.Module):
    """Encoder plus a single linear layer over the contextual word vector."""

    def __init__(
        self,
        n_chars: int,
        n_labels: int,
        cemb_size: int,
        cemb_layers: int,
        hidden_size: int,
        dropout: float,
    ):
        super().__init__()
        self.encoder = SentenceEncoder(n_chars, cemb_size, cemb_layers, hidden_size, dropout)
        self.out = nn.Linear(2 * hidden_size, n_labels)

    def scores(self, chars, char_lengths, sent_lengths) -> torch.Tensor:
        _, _, ctx = self.encoder(chars, char_lengths, sent_lengths)
        return self.out(self.encoder.dropout(ctx))


class LemmaSeq2Seq(nn.Module):
    """Encoder plus a greedy character decoder with additive attention over
    the word's character states; the contextual vector seeds the decoder."""

    def __init__(
        self,
        n_chars: int,
        n_out: int,
        cemb_size: int,
        cemb_layers: int,
        hidden_size: int,
        dropout: float,
    ):
        super().__init__()
        self.encoder = SentenceEncoder(n_chars, cemb_size, cemb_layers, hidden_size, dropout)
        self.out_emb = nn.Embedding(n_out, cemb_size, padding_idx=PAD_IDX)
        self.init_proj = nn.Linear(2 * hidden_size, cemb_size)
        self.cell = nn.LSTMCell(2 * cemb_size, cemb_size)
        self.attn_key = nn.Linear(cemb_size, cemb_size)
        self.attn_query = nn.Linear(cemb_size, cemb_size)
        self.attn_v = nn.Linear(cemb_size, 1, bias=False)
        self.out = nn.Linear(2 * cemb_size, n_out)

    def _attend(self, state, keys, char_states, char_mask) -> torch.Tensor:
        energy = self.attn_v(torch.tanh(keys + self.attn_query(state).unsqueeze(1)))
        energy = energy.squeeze(-1).masked_fill(~char_mask, float("-inf"))
        weights = torch.softmax(energy, dim=-1)
        return torch.bmm(weights.unsqueeze(1), char_states).squeeze(1)

    def _encode(self, chars, char_lengths, sent_lengths):
        char_states, _, ctx = self.encoder(chars, char_lengths, sent_lengths)
        keys = self.attn_key(char_states)
        positions = torch.arange(chars.shape[1], device=chars.device)
        char_mask = positions.unsqueeze(0) < char_lengths.unsqueeze(1)
        hidden = torch.tanh(self.init_proj(ctx))
        cell_state = torch.zeros_like(hidden)
        return char_states, keys, char_mask, hidden, cell_state

    def step_logits(self, prev_ids, hidden, cell_state, keys, char_states, char_mask):
        attended = self._attend(hidden, keys, char_states, char_mask)
        emb = self.encoder.dropout(self.out_emb(prev_ids))
        hidden, cell_state = self.cell(
            torch.cat([emb, attended], dim=-1), (hidden, cell_state)
        )
        logits = self.out(torch.cat([hidden, attended], dim=-1))
        return logits, hidden, cell_state

    def decoder_loss(
        self, chars, char_lengths, sent_lengths, targets_in, targets_out
    ) -> torch.Tensor:
        """Teacher-forced cross-entropy, padding masked out of the mean."""
        char_states, keys, char_mask, hidden, cell_state = self._encode(
            chars, char_lengths, sent_lengths
        )
        total = hidden.new_zeros(())
        n_predicted = 0
        for t in range(targets_in.shape[1]):
            mask = targets_out[:, t] != PAD_IDX
            if not bool(mask.any()):
                break
            logits, hidden, cell_state = self.step_logits(
                targets_in[:, t], hidden, cell_state, keys, char_states, char_mask
            )
            step_loss = nn.functional.cross_entropy(
                logits, targets_out[:, t], reduction="none", ignore_index=PAD_IDX
            )
            total = total + step_loss.sum()
            n_predicted += int(mask.sum())
        return total / max(n_predicted, 1)

    def greedy_decode(
        self, chars, char_lengths, sent_lengths, extra_length: int = 5
    ) -> list[list[int]]:
        """Greedy decoding capped at 2 * input length + extra_length."""
        char_states, keys, char_mask, hidden, cell_state = self._encode(
            chars, char_lengths, sent_lengths
        )
        n_words = chars.shape[0]
        caps = (2 * char_lengths + extra_length).tolist()
        prev = torch.full((n_words,), BOS_IDX, dtype=torch.long, device=chars.device)
        done = [False] * n_words
        outputs: list[list[int]] = [[] for _ in range(n_words)]
        for _ in range(max(caps)):
            logits, hidden, cell_state = self.step_logits(
                prev, hidden, cell_state, keys, char_states, char_mask
            )
            logits[:, PAD_IDX] = float("-inf")
            logits[:, UNK_IDX] = float("-inf")
            logits[:, BOS_IDX] = float("-inf")
            prev = logits.argmax(dim=-1)
            for w in range(n_words):
                if done[w]:
                    continue
                symbol = int(prev[w])
                if symbol == EOS_IDX or len(outputs[w]) >= caps[w]:
                    done[w] = True
                else:
                    outputs[w].append(symbol)
            if all(done):
                break
        return outputs
