# Generated by nnport 0.1.0: tf/subclassing -> pt/subclassing, pivot sha256 f1c011b953d12b299df6f03d62ead9a46a378045677389698a2c2c40fef4fe52
import torch
from torch import nn

INPUT_SHAPE = (100,)
METRICS = ("accuracy",)
DATASETS = {
    "imdb": ("data/imdb", "classification", "sequences"),
    "sst2": ("data/sst2", "classification", "sequences"),
}


class CNNRNN(nn.Module):
    def __init__(self):
        super().__init__()
        self.embedding = nn.Embedding(num_embeddings=10000, embedding_dim=128)
        self.conv = nn.Conv1d(in_channels=128, out_channels=64, kernel_size=(5,), stride=(1,), padding=0)
        self.conv_act = nn.ReLU()
        self.pool = nn.MaxPool1d(kernel_size=(2,), stride=(2,))
        self.conv_dropout = nn.Dropout(p=0.2)
        self.conv_lstm = nn.LSTM(input_size=64, hidden_size=64, batch_first=True)
        self.rnn = nn.LSTM(input_size=128, hidden_size=64, batch_first=True, bidirectional=True)
        self.rnn_dropout = nn.Dropout(p=0.2)
        self.fc1 = nn.Linear(in_features=192, out_features=64)
        self.fc1_act = nn.ReLU()
        self.fc_dropout = nn.Dropout(p=0.5)
        self.fc2 = nn.Linear(in_features=64, out_features=32)
        self.fc2_act = nn.ReLU()
        self.out = nn.Linear(in_features=32, out_features=1)
        self.out_act = nn.Sigmoid()

    def forward(self, inputs):
        embedding = self.embedding(inputs)
        conv = self.conv_act(self.conv(embedding.permute(0, 2, 1)))
        pool = self.pool(conv).permute(0, 2, 1)
        conv_dropout = self.conv_dropout(pool)
        conv_lstm, _ = self.conv_lstm(conv_dropout)
        conv_lstm = conv_lstm[:, -1, :]
        rnn, _ = self.rnn(embedding)
        rnn = torch.cat((rnn[:, -1, :64], rnn[:, 0, 64:]), dim=-1)
        rnn_dropout = self.rnn_dropout(rnn)
        merged = torch.cat((conv_lstm, rnn_dropout), dim=-1)
        fc1 = self.fc1_act(self.fc1(merged))
        fc_dropout = self.fc_dropout(fc1)
        fc2 = self.fc2_act(self.fc2(fc_dropout))
        out = self.out_act(self.out(fc2))
        return out


def make_loader(dataset):
    return torch.utils.data.DataLoader(dataset, batch_size=64, shuffle=True)


def train(model, loader):
    optimizer = torch.optim.Adam(model.parameters(), lr=0.001)
    criterion = nn.BCELoss()
    for epoch in range(10):
        model.train()
        for x, y in loader:
            optimizer.zero_grad()
            loss = criterion(model(x), y)
            loss.backward()
            optimizer.step()
    return model
